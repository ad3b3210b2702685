#include "editioner/diagnostics.hpp"

#include "editioner/errors.hpp"
#include "editioner/kernels.hpp"
#include "editioner/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>

namespace editioner::diagnostics {

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

nlohmann::ordered_json summary_json(const Summary& s) {
    return {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

constexpr const char* kCosineNote =
    "distances are cosine distances, 1 - cosine similarity; small values mean similar embeddings. "
    "Columns headed 'cosine similarities' in published tables of this kind hold these distances.";

}  // namespace

Summary summarize(std::span<const double> values) {
    if (values.empty()) throw DataError("cannot summarize an empty sample");
    Summary s;
    s.min = values[0];
    s.max = values[0];
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size()));
    return s;
}

ShellReport shell_report(const EmbeddingMatrix& data) {
    data.validate();
    ShellReport r;
    r.count = data.rows;
    r.norms.resize(data.rows);
    kernels::row_norms(data.data, data.rows, data.cols, r.norms);
    const auto s = summarize(r.norms);
    r.mean_norm = s.mean;
    r.std_norm = s.std;
    r.min_norm = s.min;
    r.max_norm = s.max;
    r.relative_spread = s.mean > 0.0 ? s.std / s.mean : 0.0;
    return r;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimError("cosine distance between vectors of different dimension");
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (!(aa > 0.0) || !(bb > 0.0)) throw DataError("cosine distance of a zero vector");
    const double cos = std::clamp(ab / (std::sqrt(aa) * std::sqrt(bb)), -1.0, 1.0);
    return 1.0 - cos;
}

SimilarityTable similarity_table(const EmbeddingMatrix& inputs, const EmbeddingMatrix& projected,
                                 const EmbeddingMatrix& replaced) {
    if (inputs.rows != projected.rows || inputs.rows != replaced.rows) {
        throw DimError("similarity inputs must have equal row counts");
    }
    if (inputs.cols != projected.cols || inputs.cols != replaced.cols) {
        throw DimError("similarity inputs must have equal dimensions");
    }
    inputs.validate();
    projected.validate();
    replaced.validate();

    const std::size_t m = inputs.rows, d = inputs.cols;
    // Per-row squared norms first, so zero rows are reported by index.
    std::vector<double> ni(m), np(m), nr(m);
    kernels::row_norms(inputs.data, m, d, ni);
    kernels::row_norms(projected.data, m, d, np);
    kernels::row_norms(replaced.data, m, d, nr);
    for (std::size_t r = 0; r < m; ++r) {
        if (!(ni[r] > 0.0)) throw DataError("zero-norm input row", r);
        if (!(np[r] > 0.0)) throw DataError("zero-norm projected row", r);
        if (!(nr[r] > 0.0)) throw DataError("zero-norm replaced row", r);
    }

    SimilarityTable table;
    table.rows.resize(m);
    const auto rows = static_cast<std::int64_t>(m);
#pragma omp parallel
    {
        std::vector<double> a(d), p(d), b(d);
#pragma omp for schedule(static)
        for (std::int64_t r = 0; r < rows; ++r) {
            const auto i = static_cast<std::size_t>(r);
            std::copy(inputs.row(i).begin(), inputs.row(i).end(), a.begin());
            std::copy(projected.row(i).begin(), projected.row(i).end(), p.begin());
            std::copy(replaced.row(i).begin(), replaced.row(i).end(), b.begin());
            table.rows[i] = {i, cosine_distance(a, b), cosine_distance(p, b)};
        }
    }

    std::vector<double> col(m);
    std::transform(table.rows.begin(), table.rows.end(), col.begin(), [](const auto& t) { return t.d_input_replace; });
    table.input_replace = summarize(col);
    std::transform(table.rows.begin(), table.rows.end(), col.begin(), [](const auto& t) { return t.d_project_replace; });
    table.project_replace = summarize(col);
    return table;
}

std::vector<std::pair<std::size_t, double>> evr_curve(std::span<const double> values) {
    if (values.empty()) throw DataError("explained-variance curve of an empty spectrum");
    double total = 0.0;
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("principal values must be finite and nonnegative");
        total += v;
    }
    const auto ratios = spectral::cumulative_ratios(values, total);
    std::vector<std::pair<std::size_t, double>> curve(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) curve[i] = {i + 1, ratios[i]};
    return curve;
}

std::vector<HistogramBin> histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw DataError("histogram of an empty sample");
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;

    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].left = lo + width * static_cast<double>(b);
        out[b].right = b + 1 == bins ? (hi > lo ? hi : lo + width) : lo + width * static_cast<double>(b + 1);
    }
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / width);
        out[std::min(b, bins - 1)].count++;
    }
    return out;
}

nlohmann::ordered_json to_json(const ShellReport& report, const nlohmann::ordered_json& params, bool with_rows) {
    nlohmann::ordered_json j;
    j["kind"] = "shell";
    j["params"] = params;
    if (with_rows) j["rows"] = report.norms;
    j["summary"] = {{"count", report.count},
                    {"mean", report.mean_norm},
                    {"std", report.std_norm},
                    {"min", report.min_norm},
                    {"max", report.max_norm},
                    {"relative_spread", report.relative_spread}};
    return j;
}

nlohmann::ordered_json to_json(const SimilarityTable& table, const nlohmann::ordered_json& params, bool with_rows) {
    nlohmann::ordered_json j;
    j["kind"] = "similarity";
    j["params"] = params;
    j["params"]["metric"] = kCosineNote;
    if (with_rows) {
        j["rows"] = nlohmann::ordered_json::array();
        for (const auto& t : table.rows) {
            j["rows"].push_back({{"index", t.index},
                                 {"d_input_replace", t.d_input_replace},
                                 {"d_project_replace", t.d_project_replace}});
        }
    }
    j["summary"] = {{"count", table.rows.size()},
                    {"d_input_replace", summary_json(table.input_replace)},
                    {"d_project_replace", summary_json(table.project_replace)}};
    return j;
}

nlohmann::ordered_json evr_json(const std::vector<std::pair<std::size_t, double>>& curve,
                                const nlohmann::ordered_json& params) {
    nlohmann::ordered_json j;
    j["kind"] = "evr";
    j["params"] = params;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& [k, ratio] : curve) j["rows"].push_back({{"k", k}, {"cumulative_ratio", ratio}});
    nlohmann::ordered_json summary;
    summary["components"] = curve.size();
    for (double target : {0.9, 0.95, 0.99, 0.999}) {
        const auto it = std::find_if(curve.begin(), curve.end(), [&](const auto& p) { return p.second >= target; });
        summary["k_at_" + fixed(target, 3)] = it == curve.end() ? curve.size() : it->first;
    }
    j["summary"] = summary;
    return j;
}

std::string histogram_csv(const std::vector<HistogramBin>& bins) {
    std::string out = "bin_left,bin_right,count\n";
    for (const auto& b : bins) out += fixed(b.left) + "," + fixed(b.right) + "," + std::to_string(b.count) + "\n";
    return out;
}

std::string format_table(const ShellReport& r) {
    return "distance to origin over " + std::to_string(r.count) + " rows\n" +
           "  mean  " + fixed(r.mean_norm) + "\n" +
           "  std   " + fixed(r.std_norm) + "\n" +
           "  min   " + fixed(r.min_norm) + "\n" +
           "  max   " + fixed(r.max_norm) + "\n" +
           "  std/mean " + fixed(r.relative_spread) + "\n";
}

std::string format_table(const SimilarityTable& t) {
    std::string out = std::string("# ") + kCosineNote + "\n";
    out += "                     mean       std\n";
    out += "d(input, replace)    " + fixed(t.input_replace.mean) + "  " + fixed(t.input_replace.std) + "\n";
    out += "d(project, replace)  " + fixed(t.project_replace.mean) + "  " + fixed(t.project_replace.std) + "\n";
    return out;
}

std::string format_table(const std::vector<std::pair<std::size_t, double>>& curve) {
    std::string out = "k  cumulative_ratio\n";
    for (const auto& [k, ratio] : curve) out += std::to_string(k) + "  " + fixed(ratio) + "\n";
    return out;
}

}  // namespace editioner::diagnostics
