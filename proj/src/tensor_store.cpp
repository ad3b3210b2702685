#include "editioner/tensor_store.hpp"

#include "editioner/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <regex>
#include <sstream>

#include <openssl/evp.h>

static_assert(std::endian::native == std::endian::little,
              "NPY '<f4' payloads are read and written without byte swapping");

namespace editioner {

EmbeddingMatrix::EmbeddingMatrix(std::size_t m, std::size_t d, std::vector<float> values)
    : rows(m), cols(d), data(std::move(values)) {
    if (data.size() != m * d) {
        throw DimError("matrix data has " + std::to_string(data.size()) + " entries, expected " +
                       std::to_string(m) + "x" + std::to_string(d));
    }
}

void EmbeddingMatrix::validate() const {
    if (rows == 0 || cols == 0) throw DataError("embedding matrix must have at least one row and column");
    if (data.size() != rows * cols) throw DimError("embedding matrix storage does not match its shape");
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::isfinite(data[i * cols + j])) throw DataError("non-finite matrix entry", i, j);
        }
    }
}

EmbeddingVector EmbeddingVector::from_row(std::span<const float> row) {
    return EmbeddingVector(std::vector<double>(row.begin(), row.end()));
}

double EmbeddingVector::norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
}

void EmbeddingVector::validate() const {
    if (values.empty()) throw DataError("embedding vector is empty");
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!std::isfinite(values[j])) throw DataError("non-finite vector entry", 0, j);
    }
}

namespace store {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;
constexpr std::size_t kPreludeLen = kMagicLen + 2 + 2;
constexpr std::size_t kAlign = 64;
// numpy reserves room so the leading axis can grow in place.
constexpr std::size_t kGrowthAxisDigits = 21;

std::filesystem::path tmp_sibling(const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    return tmp;
}

std::size_t parse_count(const std::string& text, const std::string& what) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
        return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
        throw FormatError("bad " + what + " '" + text + "' in NPY header");
    }
}

}  // namespace

std::size_t chunk_rows_from_env() {
    const char* env = std::getenv("EDITIONER_CHUNK_ROWS");
    if (env == nullptr || *env == '\0') return kDefaultChunkRows;
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (*end != '\0' || v <= 0) {
        throw ConfigError(std::string("EDITIONER_CHUNK_ROWS must be a positive integer, got '") + env + "'");
    }
    return static_cast<std::size_t>(v);
}

std::string npy_header(std::size_t rows, std::size_t cols) {
    const std::string leading = std::to_string(rows);
    std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + leading + ", " +
                       std::to_string(cols) + "), }";
    if (leading.size() < kGrowthAxisDigits) dict.append(kGrowthAxisDigits - leading.size(), ' ');
    const std::size_t hlen = dict.size() + 1;
    const std::size_t pad = kAlign - ((kPreludeLen + hlen) % kAlign);
    const std::size_t total = hlen + pad;
    if (total > 0xFFFF) throw FormatError("NPY v1.0 header too long");

    std::string out(kMagic, kMagicLen);
    out.push_back('\x01');
    out.push_back('\x00');
    out.push_back(static_cast<char>(total & 0xFF));
    out.push_back(static_cast<char>((total >> 8) & 0xFF));
    out += dict;
    out.append(pad, ' ');
    out.push_back('\n');
    return out;
}

NpyReader::NpyReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());

    char prelude[kPreludeLen];
    if (!in_.read(prelude, kPreludeLen)) throw FormatError(path.string() + ": truncated NPY preamble");
    if (std::memcmp(prelude, kMagic, kMagicLen) != 0) throw FormatError(path.string() + ": not an NPY file");
    if (prelude[6] != 1 || prelude[7] != 0) {
        throw FormatError(path.string() + ": unsupported NPY version " + std::to_string(int(prelude[6])) + "." +
                          std::to_string(int(prelude[7])));
    }
    const std::size_t hlen = static_cast<unsigned char>(prelude[8]) |
                             (static_cast<std::size_t>(static_cast<unsigned char>(prelude[9])) << 8);
    std::string header(hlen, '\0');
    if (!in_.read(header.data(), static_cast<std::streamsize>(hlen))) {
        throw FormatError(path.string() + ": truncated NPY header");
    }
    if (header.empty() || header.back() != '\n') throw FormatError(path.string() + ": NPY header not newline-terminated");

    static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
    static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
    static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
    std::smatch m;
    if (!std::regex_search(header, m, descr_re)) throw FormatError(path.string() + ": NPY header lacks descr");
    if (m[1] != "<f4") throw FormatError(path.string() + ": dtype " + m[1].str() + " is not little-endian float32");
    if (!std::regex_search(header, m, order_re)) throw FormatError(path.string() + ": NPY header lacks fortran_order");
    if (m[1] != "False") throw FormatError(path.string() + ": Fortran-ordered arrays are not supported");
    if (!std::regex_search(header, m, shape_re)) throw FormatError(path.string() + ": NPY header lacks shape");

    std::vector<std::string> dims;
    std::stringstream ss(m[1].str());
    for (std::string item; std::getline(ss, item, ',');) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
                   item.end());
        if (!item.empty()) dims.push_back(item);
    }
    if (dims.size() != 2) {
        throw FormatError(path.string() + ": expected a 2-D array, got " + std::to_string(dims.size()) + "-D");
    }
    rows_ = parse_count(dims[0], "row count");
    cols_ = parse_count(dims[1], "column count");
    if (rows_ == 0 || cols_ == 0) throw FormatError(path.string() + ": empty array shape");

    // Payload length must match the shape exactly.
    const auto payload_start = in_.tellg();
    in_.seekg(0, std::ios::end);
    const auto payload = static_cast<std::uintmax_t>(in_.tellg() - payload_start);
    in_.seekg(payload_start);
    if (payload != static_cast<std::uintmax_t>(rows_) * cols_ * sizeof(float)) {
        throw FormatError(path.string() + ": payload size does not match shape");
    }
}

std::size_t NpyReader::read_rows(std::span<float> out, std::size_t max_rows) {
    const std::size_t n = std::min(max_rows, rows_ - next_row_);
    if (n == 0) return 0;
    if (out.size() < n * cols_) throw DimError("read buffer too small for requested rows");
    if (!in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(n * cols_ * sizeof(float)))) {
        throw IoError(path_.string() + ": short read");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (!std::isfinite(out[i * cols_ + j])) throw DataError("non-finite matrix entry", next_row_ + i, j);
        }
    }
    next_row_ += n;
    return n;
}

NpyWriter::NpyWriter(const std::filesystem::path& path, std::size_t rows, std::size_t cols)
    : path_(path), tmp_path_(tmp_sibling(path)), rows_(rows), cols_(cols) {
    if (rows == 0 || cols == 0) throw DataError("refusing to write an empty matrix");
    out_.open(tmp_path_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open " + tmp_path_.string() + " for writing");
    const std::string header = npy_header(rows, cols);
    out_.write(header.data(), static_cast<std::streamsize>(header.size()));
    if (!out_) throw IoError("write failed on " + tmp_path_.string());
}

NpyWriter::~NpyWriter() {
    if (!closed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_path_, ec);
    }
}

void NpyWriter::append_rows(std::span<const float> values) {
    if (closed_) throw IoError("append to a closed writer");
    if (values.size() % cols_ != 0) throw DimError("appended data is not a whole number of rows");
    const std::size_t n = values.size() / cols_;
    if (written_ + n > rows_) throw DimError("more rows appended than declared in the header");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (!std::isfinite(values[i * cols_ + j])) throw DataError("non-finite matrix entry", written_ + i, j);
        }
    }
    out_.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    if (!out_) throw IoError("write failed on " + tmp_path_.string());
    written_ += n;
}

void NpyWriter::close() {
    if (closed_) return;
    if (written_ != rows_) {
        throw DimError("writer closed after " + std::to_string(written_) + " of " + std::to_string(rows_) + " rows");
    }
    out_.close();
    if (!out_) throw IoError("write failed on " + tmp_path_.string());
    std::error_code ec;
    std::filesystem::rename(tmp_path_, path_, ec);
    if (ec) throw IoError("cannot move " + tmp_path_.string() + " to " + path_.string() + ": " + ec.message());
    closed_ = true;
}

EmbeddingMatrix read_matrix(const std::filesystem::path& path, std::size_t chunk_rows) {
    NpyReader reader(path);
    EmbeddingMatrix m(reader.rows(), reader.cols());
    chunk_rows = std::max<std::size_t>(chunk_rows, 1);
    std::size_t at = 0;
    while (at < m.rows) {
        const std::size_t n = reader.read_rows(std::span<float>(m.data).subspan(at * m.cols), chunk_rows);
        at += n;
    }
    const auto sidecar = manifest_path(path);
    if (std::filesystem::exists(sidecar)) {
        const auto manifest = read_manifest(path);
        if (!manifest.created_from.empty()) m.source_hash = manifest.created_from.front().digest;
    }
    return m;
}

void write_matrix(const EmbeddingMatrix& matrix, const std::filesystem::path& path, std::size_t chunk_rows) {
    if (matrix.data.size() != matrix.rows * matrix.cols) throw DimError("matrix storage does not match its shape");
    NpyWriter writer(path, matrix.rows, matrix.cols);
    chunk_rows = std::max<std::size_t>(chunk_rows, 1);
    for (std::size_t at = 0; at < matrix.rows; at += chunk_rows) {
        const std::size_t n = std::min(chunk_rows, matrix.rows - at);
        writer.append_rows(std::span<const float>(matrix.data).subspan(at * matrix.cols, n * matrix.cols));
    }
    writer.close();
}

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new()) {
        if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
            throw IoError("SHA-256 initialisation failed");
        }
    }
    ~Sha256() { EVP_MD_CTX_free(ctx_); }
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }

    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        EVP_DigestFinal_ex(ctx_, md, &len);
        static constexpr char digits[] = "0123456789abcdef";
        std::string out = "sha256:";
        for (unsigned int i = 0; i < len; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 0xF]);
        }
        return out;
    }

private:
    EVP_MD_CTX* ctx_;
};

}  // namespace

std::string digest_bytes(std::string_view bytes) {
    Sha256 h;
    h.update(bytes.data(), bytes.size());
    return h.hex();
}

std::string digest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    Sha256 h;
    std::vector<char> buf(1 << 20);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

std::string_view to_string(ArtifactKind kind) {
    switch (kind) {
        case ArtifactKind::embeddings: return "embeddings";
        case ArtifactKind::reducer: return "reducer";
        case ArtifactKind::subspace: return "subspace";
        case ArtifactKind::corpus: return "corpus";
    }
    return "?";
}

ArtifactKind parse_artifact_kind(std::string_view name) {
    if (name == "embeddings") return ArtifactKind::embeddings;
    if (name == "reducer") return ArtifactKind::reducer;
    if (name == "subspace") return ArtifactKind::subspace;
    if (name == "corpus") return ArtifactKind::corpus;
    throw FormatError("unknown artifact kind '" + std::string(name) + "'");
}

std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
    auto p = artifact;
    p.replace_extension(".manifest.json");
    return p;
}

std::string render_manifest(const ArtifactManifest& manifest) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(manifest.kind);
    j["dim"] = manifest.dim;
    if (manifest.reduced_dim) j["reduced_dim"] = *manifest.reduced_dim;
    if (manifest.concept_slot) j["concept_slot"] = *manifest.concept_slot;
    if (manifest.concept_word) j["concept_word"] = *manifest.concept_word;
    j["created_from"] = nlohmann::ordered_json::array();
    for (const auto& src : manifest.created_from) {
        j["created_from"].push_back({{"path", src.path}, {"digest", src.digest}});
    }
    j["format_version"] = manifest.format_version;
    for (const auto& [key, value] : manifest.extra.items()) j[key] = value;
    return j.dump(2) + "\n";
}

ArtifactManifest parse_manifest(std::string_view text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw FormatError("manifest must be a JSON object");

    auto dimension = [](const nlohmann::ordered_json& v, const char* key) {
        if (!v.is_number_unsigned()) throw FormatError(std::string("manifest ") + key + " must be a nonnegative integer");
        return v.get<std::size_t>();
    };
    ArtifactManifest m;
    try {
        m.kind = parse_artifact_kind(j.at("kind").get<std::string>());
        m.dim = dimension(j.at("dim"), "dim");
        if (j.contains("reduced_dim")) m.reduced_dim = dimension(j["reduced_dim"], "reduced_dim");
        if (j.contains("concept_slot")) m.concept_slot = j["concept_slot"].get<std::string>();
        if (j.contains("concept_word")) m.concept_word = j["concept_word"].get<std::string>();
        for (const auto& src : j.at("created_from")) {
            m.created_from.push_back({src.at("path").get<std::string>(), src.at("digest").get<std::string>()});
        }
        m.format_version = j.at("format_version").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
    if (m.format_version != kFormatVersion) {
        throw FormatError("unsupported manifest format_version " + std::to_string(m.format_version));
    }
    static constexpr std::string_view common[] = {"kind", "dim", "reduced_dim", "concept_slot",
                                                  "concept_word", "created_from", "format_version"};
    for (const auto& [key, value] : j.items()) {
        if (std::find(std::begin(common), std::end(common), key) == std::end(common)) m.extra[key] = value;
    }
    return m;
}

void write_manifest(const ArtifactManifest& manifest, const std::filesystem::path& artifact) {
    write_text_file(manifest_path(artifact), render_manifest(manifest));
}

ArtifactManifest read_manifest(const std::filesystem::path& artifact) {
    return parse_manifest(read_text_file(manifest_path(artifact)));
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    const auto tmp = tmp_sibling(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw IoError("write failed on " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace store
}  // namespace editioner
