#pragma once

// Reducer and subspace artifacts: basis rows as NPY plus a manifest sidecar
// carrying the spectrum and provenance.

#include "editioner/spectral.hpp"
#include "editioner/subspace.hpp"
#include "editioner/tensor_store.hpp"

#include <filesystem>
#include <vector>

namespace editioner::store {

void write_reducer(const spectral::ReducedSpace& space, const std::filesystem::path& path,
                   const std::vector<SourceRef>& sources = {});
/// Re-validates orthonormality; throws IntegrityError on violation.
spectral::ReducedSpace read_reducer(const std::filesystem::path& path);

void write_subspace(const subspace::ConceptSubspace& subspace, const std::filesystem::path& path);
/// Re-validates orthonormality and the rank/threshold relation; throws IntegrityError on violation.
subspace::ConceptSubspace read_subspace(const std::filesystem::path& path);

}  // namespace editioner::store
