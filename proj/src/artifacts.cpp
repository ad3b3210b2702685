#include "editioner/artifacts.hpp"

#include "editioner/errors.hpp"

#include <cmath>

namespace editioner::store {

namespace {

template <typename T>
T extra_field(const ArtifactManifest& m, const char* key) {
    if (!m.extra.contains(key)) throw FormatError(std::string("manifest is missing '") + key + "'");
    try {
        return m.extra.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest field '") + key + "' has the wrong type: " + e.what());
    }
}

}  // namespace

void write_reducer(const spectral::ReducedSpace& space, const std::filesystem::path& path,
                   const std::vector<SourceRef>& sources) {
    write_matrix(EmbeddingMatrix(space.reduced_dim, space.ambient_dim, space.basis), path);

    ArtifactManifest m;
    m.kind = ArtifactKind::reducer;
    m.dim = space.ambient_dim;
    m.reduced_dim = space.reduced_dim;
    m.created_from = sources;
    m.extra["captured_variance_ratio"] = space.captured_variance_ratio;
    m.extra["total_variance"] = space.total_variance;
    m.extra["spectrum_values"] = space.values;
    write_manifest(m, path);
}

spectral::ReducedSpace read_reducer(const std::filesystem::path& path) {
    const auto manifest = read_manifest(path);
    if (manifest.kind != ArtifactKind::reducer) {
        throw FormatError(path.string() + " is a " + std::string(to_string(manifest.kind)) + " artifact, not a reducer");
    }
    auto basis = read_matrix(path);
    if (!manifest.reduced_dim || basis.rows != *manifest.reduced_dim || basis.cols != manifest.dim) {
        throw IntegrityError(path.string() + ": basis shape disagrees with its manifest");
    }
    spectral::ReducedSpace space;
    space.ambient_dim = basis.cols;
    space.reduced_dim = basis.rows;
    space.basis = std::move(basis.data);
    space.captured_variance_ratio = extra_field<double>(manifest, "captured_variance_ratio");
    space.total_variance = extra_field<double>(manifest, "total_variance");
    space.values = extra_field<std::vector<double>>(manifest, "spectrum_values");
    if (space.values.size() != space.reduced_dim) {
        throw IntegrityError(path.string() + ": spectrum length disagrees with the reduced dimension");
    }
    space.validate();
    return space;
}

void write_subspace(const subspace::ConceptSubspace& s, const std::filesystem::path& path) {
    write_matrix(EmbeddingMatrix(s.k(), s.working_dim(), std::vector<float>(s.basis().begin(), s.basis().end())),
                 path);

    const auto& prov = s.provenance();
    ArtifactManifest m;
    m.kind = ArtifactKind::subspace;
    m.dim = prov.ambient_dim.value_or(s.working_dim());
    if (prov.ambient_dim) m.reduced_dim = s.working_dim();
    m.concept_slot = std::string(prompts::slot_name(s.concept_spec().slot));
    m.concept_word = s.concept_spec().word;
    m.created_from = prov.sources;
    m.extra["k"] = s.k();
    m.extra["evr_threshold"] = s.evr_threshold();
    m.extra["working_dim"] = s.working_dim();
    m.extra["sample_count"] = s.sample_count();
    m.extra["reducer_digest"] = prov.reducer_digest;
    m.extra["spectrum_values"] = std::vector<double>(s.values().begin(), s.values().end());
    m.extra["total_variance"] = s.total_variance();
    m.extra["explained_variance_ratio"] = s.explained_ratio();
    write_manifest(m, path);
}

subspace::ConceptSubspace read_subspace(const std::filesystem::path& path) {
    const auto manifest = read_manifest(path);
    if (manifest.kind != ArtifactKind::subspace) {
        throw FormatError(path.string() + " is a " + std::string(to_string(manifest.kind)) + " artifact, not a subspace");
    }
    if (!manifest.concept_slot || !manifest.concept_word) throw FormatError(path.string() + ": manifest lacks the concept");
    auto basis = read_matrix(path);

    const auto k = extra_field<std::size_t>(manifest, "k");
    const auto working_dim = extra_field<std::size_t>(manifest, "working_dim");
    if (basis.rows != k || basis.cols != working_dim) {
        throw IntegrityError(path.string() + ": basis shape disagrees with its manifest");
    }
    if (manifest.reduced_dim ? *manifest.reduced_dim != working_dim : manifest.dim != working_dim) {
        throw IntegrityError(path.string() + ": working dimension disagrees with dim/reduced_dim");
    }

    subspace::ConceptSubspace::Provenance prov;
    if (manifest.reduced_dim) prov.ambient_dim = manifest.dim;
    prov.reducer_digest = extra_field<std::string>(manifest, "reducer_digest");
    prov.sources = manifest.created_from;

    prompts::ConceptSpec concept_spec;
    try {
        concept_spec = {prompts::parse_slot(*manifest.concept_slot), *manifest.concept_word};
    } catch (const ConfigError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    subspace::ConceptSubspace s(std::move(basis.data), working_dim,
                                extra_field<std::vector<double>>(manifest, "spectrum_values"),
                                extra_field<double>(manifest, "total_variance"),
                                extra_field<double>(manifest, "evr_threshold"), std::move(concept_spec),
                                extra_field<std::size_t>(manifest, "sample_count"), std::move(prov));
    const auto recorded = extra_field<double>(manifest, "explained_variance_ratio");
    if (std::abs(recorded - s.explained_ratio()) > 1e-12) {
        throw IntegrityError(path.string() + ": recorded explained-variance ratio disagrees with the spectrum");
    }
    return s;
}

}  // namespace editioner::store
