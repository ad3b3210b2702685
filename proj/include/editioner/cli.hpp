#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace editioner::cli {

/// Settings shared by the commands. A --config JSON file may provide any of
/// these keys (and nothing else); command-line flags take precedence.
struct PipelineConfig {
    std::string corpus;
    std::string embeddings;
    std::string reducer;
    std::string subspace;
    std::string output;
    double threshold = 0.95;
    std::size_t target_dim = 0;
    std::optional<std::uint64_t> seed;
    std::string mode = "compensated";
    std::size_t chunk_rows = 0;  // 0 = EDITIONER_CHUNK_ROWS or the store default
};

/// Applies a config file's keys onto cfg. Throws ConfigError on unknown keys or bad types.
void apply_config_json(std::string_view json_text, PipelineConfig& cfg);

/// Runs `editioner <args...>` (args excludes the program name). Returns the
/// process exit code: 0 ok, 2 configuration, 3 data, 4 I/O.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace editioner::cli
