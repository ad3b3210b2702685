#pragma once

// Embedding-level measurements: distance-to-origin statistics (the
// hypersphere-shell check), cosine-distance triples between input,
// projected and replaced prompts, and explained-variance curves.
//
// Cosine distance is 1 - cos(a, b), in [0, 2].

#include "editioner/tensor_store.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace editioner::diagnostics {

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
};

/// Deterministic left-to-right aggregation.
Summary summarize(std::span<const double> values);

struct ShellReport {
    std::size_t count = 0;
    double mean_norm = 0.0;
    double std_norm = 0.0;
    double min_norm = 0.0;
    double max_norm = 0.0;
    double relative_spread = 0.0;  // std / mean
    std::vector<double> norms;
};

ShellReport shell_report(const EmbeddingMatrix& data);

double cosine_distance(std::span<const double> a, std::span<const double> b);

struct SimilarityTriple {
    std::size_t index = 0;
    double d_input_replace = 0.0;
    double d_project_replace = 0.0;
};

struct SimilarityTable {
    std::vector<SimilarityTriple> rows;
    Summary input_replace;
    Summary project_replace;
};

/// Per-row cosine distances input->replaced and projected->replaced.
SimilarityTable similarity_table(const EmbeddingMatrix& inputs, const EmbeddingMatrix& projected,
                                 const EmbeddingMatrix& replaced);

/// (k, cumulative ratio) for k = 1..n; ends at exactly 1.
std::vector<std::pair<std::size_t, double>> evr_curve(std::span<const double> values);

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    std::size_t count = 0;
};

/// Equal-width bins spanning [min, max]; the last bin is closed.
std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins);

// Machine-readable reports: {kind, params, rows?, summary}.
nlohmann::ordered_json to_json(const ShellReport& report, const nlohmann::ordered_json& params, bool with_rows);
nlohmann::ordered_json to_json(const SimilarityTable& table, const nlohmann::ordered_json& params, bool with_rows);
nlohmann::ordered_json evr_json(const std::vector<std::pair<std::size_t, double>>& curve,
                                const nlohmann::ordered_json& params);

std::string histogram_csv(const std::vector<HistogramBin>& bins);

// Human-readable renderings for terminal output.
std::string format_table(const ShellReport& report);
std::string format_table(const SimilarityTable& table);
std::string format_table(const std::vector<std::pair<std::size_t, double>>& curve);

}  // namespace editioner::diagnostics
