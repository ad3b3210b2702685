#pragma once

// Embedding matrices on disk.
//
// Binary payloads are NPY v1.0 ('<f4', C order, 2-D). Anything else a
// consumer needs to know (provenance, spectra, concept) goes into a JSON
// sidecar named <stem>.manifest.json next to the array file, so the array
// itself stays readable by any NPY loader.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace editioner {

/// Row-major m x d float32 matrix; row i is the embedding of corpus line i.
struct EmbeddingMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<float> data;
    std::string source_hash;  // digest of the originating corpus, empty if unknown

    EmbeddingMatrix() = default;
    EmbeddingMatrix(std::size_t m, std::size_t d) : rows(m), cols(d), data(m * d, 0.0f) {}
    EmbeddingMatrix(std::size_t m, std::size_t d, std::vector<float> values);

    std::span<float> row(std::size_t i) { return {data.data() + i * cols, cols}; }
    std::span<const float> row(std::size_t i) const { return {data.data() + i * cols, cols}; }

    /// Throws DataError on an empty shape or the first non-finite entry.
    void validate() const;

    bool operator==(const EmbeddingMatrix& other) const {
        return rows == other.rows && cols == other.cols && data == other.data;
    }
};

/// A single embedding, held in double precision for projection arithmetic.
struct EmbeddingVector {
    std::vector<double> values;

    EmbeddingVector() = default;
    explicit EmbeddingVector(std::size_t d) : values(d, 0.0) {}
    explicit EmbeddingVector(std::vector<double> v) : values(std::move(v)) {}
    static EmbeddingVector from_row(std::span<const float> row);

    std::size_t dim() const { return values.size(); }
    double norm() const;
    void validate() const;
};

namespace store {

inline constexpr std::size_t kDefaultChunkRows = 4096;
inline constexpr int kFormatVersion = 1;

/// EDITIONER_CHUNK_ROWS if set to a positive integer, else the default.
std::size_t chunk_rows_from_env();

/// Exact NPY v1.0 preamble (magic through terminating newline) for an m x d '<f4' array.
std::string npy_header(std::size_t rows, std::size_t cols);

/// Streams rows out of an NPY file without holding the whole array.
class NpyReader {
public:
    explicit NpyReader(const std::filesystem::path& path);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t rows_read() const { return next_row_; }
    const std::filesystem::path& path() const { return path_; }

    /// Reads up to max_rows rows into out (which must hold max_rows * cols
    /// floats). Returns the number of rows read; 0 at end of data. Entries
    /// are checked for finiteness and reported by absolute row/column.
    std::size_t read_rows(std::span<float> out, std::size_t max_rows);

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t next_row_ = 0;
};

/// Writes an NPY file of known shape row-chunk by row-chunk. Output goes to
/// a temporary sibling and is renamed into place by close(); an unclosed
/// writer leaves the destination untouched.
class NpyWriter {
public:
    NpyWriter(const std::filesystem::path& path, std::size_t rows, std::size_t cols);
    ~NpyWriter();
    NpyWriter(const NpyWriter&) = delete;
    NpyWriter& operator=(const NpyWriter&) = delete;

    void append_rows(std::span<const float> values);
    void close();

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_path_;
    std::ofstream out_;
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t written_ = 0;
    bool closed_ = false;
};

EmbeddingMatrix read_matrix(const std::filesystem::path& path,
                            std::size_t chunk_rows = kDefaultChunkRows);
void write_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& path,
                  std::size_t chunk_rows = kDefaultChunkRows);

// Digests are lowercase hex SHA-256, prefixed "sha256:".
std::string digest_bytes(std::string_view bytes);
std::string digest_file(const std::filesystem::path& path);

enum class ArtifactKind { embeddings, reducer, subspace, corpus };

std::string_view to_string(ArtifactKind kind);
ArtifactKind parse_artifact_kind(std::string_view name);

struct SourceRef {
    std::string path;
    std::string digest;

    bool operator==(const SourceRef&) const = default;
};

struct ArtifactManifest {
    ArtifactKind kind = ArtifactKind::embeddings;
    std::size_t dim = 0;
    std::optional<std::size_t> reduced_dim;
    std::optional<std::string> concept_slot;
    std::optional<std::string> concept_word;
    std::vector<SourceRef> created_from;
    int format_version = kFormatVersion;
    // Kind-specific payload, serialized after the common keys in insertion order.
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
};

/// "<dir>/<stem>.manifest.json" for "<dir>/<stem>.<ext>".
std::filesystem::path manifest_path(const std::filesystem::path& artifact);

std::string render_manifest(const ArtifactManifest& manifest);
ArtifactManifest parse_manifest(std::string_view text);

void write_manifest(const ArtifactManifest& manifest, const std::filesystem::path& artifact);
ArtifactManifest read_manifest(const std::filesystem::path& artifact);

/// Writes text atomically (temp file + rename).
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace store
}  // namespace editioner
