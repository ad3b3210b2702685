#include "editioner/cli.hpp"

#include "editioner/artifacts.hpp"
#include "editioner/diagnostics.hpp"
#include "editioner/errors.hpp"
#include "editioner/kernels.hpp"
#include "editioner/prompt_forge.hpp"
#include "editioner/spectral.hpp"
#include "editioner/subspace.hpp"
#include "editioner/tensor_store.hpp"

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

namespace editioner::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw ConfigError(std::string("missing required option --") + flag);
}

void require_input(const std::string& value, const char* flag) {
    require(value, flag);
    if (!fs::exists(value)) throw ConfigError(std::string("--") + flag + " path does not exist: " + value);
}

std::size_t effective_chunk_rows(const PipelineConfig& cfg) {
    return cfg.chunk_rows > 0 ? cfg.chunk_rows : store::chunk_rows_from_env();
}

store::SourceRef source(const std::string& path) { return {path, store::digest_file(path)}; }

fs::path sibling(const fs::path& artifact, const std::string& suffix) {
    auto p = artifact;
    p.replace_extension(suffix);
    return p;
}

std::vector<double> parse_offsets(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError("bad traversal offset '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("--offsets needs at least one value");
    return out;
}

// Loaded subspace plus the optional reducer it was built in.
struct Edition {
    subspace::ConceptSubspace subspace;
    std::optional<spectral::ReducedSpace> reducer;
};

Edition load_edition(const PipelineConfig& cfg) {
    require_input(cfg.subspace, "subspace");
    auto s = store::read_subspace(cfg.subspace);
    std::optional<spectral::ReducedSpace> reducer;
    if (!cfg.reducer.empty()) {
        require_input(cfg.reducer, "reducer");
        const auto digest = store::digest_file(cfg.reducer);
        if (!s.provenance().reducer_digest.empty() && s.provenance().reducer_digest != digest) {
            throw IntegrityError("subspace was built in a different reduced space than " + cfg.reducer);
        }
        reducer = store::read_reducer(cfg.reducer);
        if (reducer->reduced_dim != s.working_dim()) {
            throw DimError("reducer output dimension does not match the subspace working dimension");
        }
    } else if (s.provenance().ambient_dim) {
        throw ConfigError("subspace works in a reduced space; pass the matching --reducer");
    }
    return {std::move(s), std::move(reducer)};
}

EmbeddingVector to_working(const EmbeddingVector& v, const Edition& e) {
    return e.reducer ? spectral::reduce(v, *e.reducer) : v;
}

EmbeddingMatrix to_output(const std::vector<EmbeddingVector>& vs, const Edition& e) {
    const std::size_t dim = e.reducer ? e.reducer->ambient_dim : e.subspace.working_dim();
    EmbeddingMatrix out(vs.size(), dim);
    for (std::size_t r = 0; r < vs.size(); ++r) {
        const auto full = e.reducer ? spectral::lift(vs[r], *e.reducer) : vs[r];
        for (std::size_t c = 0; c < dim; ++c) out.data[r * dim + c] = static_cast<float>(full.values[c]);
    }
    return out;
}

EmbeddingVector input_row(const EmbeddingMatrix& m, std::size_t row, const char* what) {
    if (row >= m.rows) {
        throw ConfigError(std::string(what) + " row " + std::to_string(row) + " is out of range (" +
                          std::to_string(m.rows) + " rows)");
    }
    return EmbeddingVector::from_row(m.row(row));
}

void write_embeddings(const EmbeddingMatrix& m, const fs::path& path, std::vector<store::SourceRef> sources,
                      std::size_t chunk_rows, ordered_json extra = ordered_json::object()) {
    store::write_matrix(m, path, chunk_rows);
    store::ArtifactManifest manifest;
    manifest.kind = store::ArtifactKind::embeddings;
    manifest.dim = m.cols;
    manifest.created_from = std::move(sources);
    manifest.extra = std::move(extra);
    manifest.extra["rows"] = m.rows;
    store::write_manifest(manifest, path);
}

// ---------------------------------------------------------------------------
// Commands

struct GenPromptsArgs {
    std::string wordlist;
    std::string concept_spec;
    bool eval = false;
    std::size_t per_category = 0;
    std::string replaced_output;
};

void cmd_gen_prompts(const PipelineConfig& cfg, const GenPromptsArgs& a, std::ostream& out) {
    require(cfg.output, "output");
    const auto words = a.wordlist.empty() ? prompts::WordList::defaults()
                                          : (require_input(a.wordlist, "wordlist"), prompts::load_wordlist(a.wordlist));
    auto corpus = prompts::generate_all(words);

    std::optional<prompts::ConceptSpec> concept_spec;
    if (!a.concept_spec.empty()) concept_spec = prompts::parse_concept(a.concept_spec);
    if (a.eval) {
        if (!concept_spec) throw ConfigError("--eval needs --concept");
        if (!cfg.seed) throw ConfigError("--eval samples prompts and needs an explicit --seed");
        if (a.per_category == 0) throw ConfigError("--eval needs --per-category");
        corpus = prompts::evaluation_set(corpus, *concept_spec, a.per_category, *cfg.seed);
    } else if (concept_spec) {
        corpus = prompts::filter_concept(corpus, *concept_spec);
    }
    if (!a.replaced_output.empty() && !concept_spec) throw ConfigError("--replaced-output needs --concept");

    const auto text = prompts::render_corpus(corpus);
    store::write_text_file(cfg.output, text);

    store::ArtifactManifest manifest;
    manifest.kind = store::ArtifactKind::corpus;
    manifest.dim = 0;
    if (concept_spec) {
        manifest.concept_slot = std::string(prompts::slot_name(concept_spec->slot));
        manifest.concept_word = concept_spec->word;
    }
    const auto wordlist_text = prompts::render_wordlist(words);
    manifest.created_from.push_back({a.wordlist.empty() ? std::string("builtin:default") : a.wordlist,
                                     store::digest_bytes(wordlist_text)});
    manifest.extra["count"] = corpus.size();
    manifest.extra["digest"] = store::digest_bytes(text);
    manifest.extra["selection"] = a.eval ? "evaluation" : (concept_spec ? "concept" : "all");
    if (a.eval) {
        manifest.extra["per_category"] = a.per_category;
        manifest.extra["seed"] = *cfg.seed;
    }
    manifest.extra["slot_sizes"] = ordered_json::object();
    for (auto s : prompts::kSlots) manifest.extra["slot_sizes"][std::string(prompts::slot_name(s))] = words[s].size();
    store::write_manifest(manifest, cfg.output);

    out << "wrote " << corpus.size() << " prompts to " << cfg.output << "\n";

    if (!a.replaced_output.empty()) {
        prompts::PromptCorpus replaced{words, {}};
        replaced.records.reserve(corpus.size());
        for (const auto& r : corpus.records) replaced.records.push_back(prompts::replaced_prompt(words, r, *concept_spec));
        store::write_text_file(a.replaced_output, prompts::render_corpus(replaced));
        out << "wrote " << replaced.size() << " replaced prompts to " << a.replaced_output << "\n";
    }
}

void cmd_build_reducer(const PipelineConfig& cfg, std::ostream& out) {
    require_input(cfg.embeddings, "embeddings");
    require(cfg.output, "output");
    if (cfg.target_dim == 0) throw ConfigError("missing required option --target-dim");
    store::NpyReader reader(cfg.embeddings);
    const auto space = spectral::build_reducer(reader, cfg.target_dim, effective_chunk_rows(cfg));
    store::write_reducer(space, cfg.output, {source(cfg.embeddings)});
    out << "reduced " << space.ambient_dim << " -> " << space.reduced_dim << " dims\n";
    out << "captured_variance_ratio " << fixed(space.captured_variance_ratio) << "\n";
}

void cmd_build_subspace(const PipelineConfig& cfg, const std::string& concept_text, std::ostream& out) {
    require_input(cfg.embeddings, "embeddings");
    require(cfg.output, "output");
    if (concept_text.empty()) throw ConfigError("missing required option --concept");
    if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0)) throw ConfigError("--threshold must be in (0, 1]");
    const auto concept_spec = prompts::parse_concept(concept_text);

    auto data = store::read_matrix(cfg.embeddings, effective_chunk_rows(cfg));
    subspace::ConceptSubspace::Provenance prov;
    prov.sources.push_back(source(cfg.embeddings));
    if (!cfg.reducer.empty()) {
        require_input(cfg.reducer, "reducer");
        const auto reducer = store::read_reducer(cfg.reducer);
        data = spectral::reduce(data, reducer);
        prov.ambient_dim = reducer.ambient_dim;
        prov.reducer_digest = store::digest_file(cfg.reducer);
        prov.sources.push_back(source(cfg.reducer));
    }
    const auto s = subspace::build_subspace(data, concept_spec, cfg.threshold, std::move(prov));
    store::write_subspace(s, cfg.output);
    out << "concept " << prompts::to_string(concept_spec) << "\n";
    out << "k " << s.k() << " of " << s.working_dim() << "\n";
    out << "cumulative_ratio " << fixed(s.explained_ratio()) << "\n";
}

void cmd_project(const PipelineConfig& cfg, const std::string& orthogonal, bool strict, std::ostream& out,
                 std::ostream& err) {
    require_input(cfg.embeddings, "embeddings");
    require(cfg.output, "output");
    const auto mode = subspace::parse_projection_mode(cfg.mode);
    subspace::OrthogonalRows policy;
    if (orthogonal == "zero") {
        policy = subspace::OrthogonalRows::zero;
    } else if (orthogonal == "exclude") {
        policy = subspace::OrthogonalRows::exclude;
    } else {
        throw ConfigError("--orthogonal must be 'zero' or 'exclude'");
    }
    const auto edition = load_edition(cfg);
    const auto chunk = effective_chunk_rows(cfg);

    auto input = store::read_matrix(cfg.embeddings, chunk);
    if (edition.reducer) input = spectral::reduce(input, *edition.reducer);
    const auto batch = subspace::project_batch(input, edition.subspace, mode, policy);

    if (!batch.orthogonal_rows.empty()) {
        err << "warning: " << batch.orthogonal_rows.size() << " row(s) orthogonal to the subspace (first: row "
            << batch.orthogonal_rows.front() << ")\n";
        if (strict) throw OrthogonalInputError("orthogonal rows present and --strict given");
    }

    const auto result = edition.reducer ? spectral::lift(batch.output, *edition.reducer) : batch.output;
    std::vector<store::SourceRef> sources{source(cfg.embeddings), source(cfg.subspace)};
    if (edition.reducer) sources.push_back(source(cfg.reducer));
    ordered_json extra;
    extra["projection_mode"] = subspace::to_string(mode);
    extra["concept"] = prompts::to_string(edition.subspace.concept_spec());
    write_embeddings(result, cfg.output, sources, chunk, extra);

    ordered_json report;
    report["kind"] = "eta";
    report["params"] = {{"embeddings", cfg.embeddings}, {"subspace", cfg.subspace}, {"reducer", cfg.reducer},
                        {"mode", subspace::to_string(mode)}, {"orthogonal", orthogonal}};
    report["rows"] = ordered_json::array();
    for (std::size_t i = 0; i < batch.row_index.size(); ++i) {
        report["rows"].push_back(
            {{"row", batch.row_index[i]}, {"eta", batch.eta[i]}, {"raw_norm_ratio", batch.raw_norm_ratio[i]}});
    }
    std::vector<double> etas;
    for (std::size_t i = 0; i < batch.eta.size(); ++i) {
        if (batch.eta[i] > 0.0) etas.push_back(batch.eta[i]);
    }
    ordered_json summary;
    summary["count"] = input.rows;
    summary["projected"] = etas.size();
    summary["orthogonal_rows"] = batch.orthogonal_rows;
    if (!etas.empty()) {
        const auto s = diagnostics::summarize(etas);
        summary["eta"] = {{"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
    }
    report["summary"] = summary;
    const auto report_path = sibling(cfg.output, ".eta.json");
    store::write_text_file(report_path, report.dump(2) + "\n");

    out << "projected " << etas.size() << " of " << input.rows << " rows (" << subspace::to_string(mode) << ")\n";
    if (!etas.empty()) {
        const auto s = diagnostics::summarize(etas);
        out << "eta mean " << fixed(s.mean) << " min " << fixed(s.min) << " max " << fixed(s.max) << "\n";
    }
    out << "report " << report_path.string() << "\n";
}

struct DiagnoseArgs {
    std::string inputs, projected, replaced, values;
    std::size_t bins = 0;
    bool rows = false;
    bool center = false;
};

void cmd_diagnose_shell(const PipelineConfig& cfg, const DiagnoseArgs& a, std::ostream& out) {
    require_input(cfg.embeddings, "embeddings");
    require(cfg.output, "output");
    const auto report = diagnostics::shell_report(store::read_matrix(cfg.embeddings, effective_chunk_rows(cfg)));
    ordered_json params{{"embeddings", cfg.embeddings}};
    store::write_text_file(cfg.output, diagnostics::to_json(report, params, a.rows).dump(2) + "\n");
    out << diagnostics::format_table(report);
    if (a.bins > 0) {
        const auto csv = sibling(cfg.output, ".hist.csv");
        store::write_text_file(csv, diagnostics::histogram_csv(diagnostics::histogram(report.norms, a.bins)));
        out << "histogram " << csv.string() << "\n";
    }
    out << "report " << cfg.output << "\n";
}

void cmd_diagnose_similarity(const PipelineConfig& cfg, const DiagnoseArgs& a, std::ostream& out) {
    require_input(a.inputs, "inputs");
    require_input(a.projected, "projected");
    require_input(a.replaced, "replaced");
    require(cfg.output, "output");
    const auto chunk = effective_chunk_rows(cfg);
    const auto table = diagnostics::similarity_table(store::read_matrix(a.inputs, chunk),
                                                     store::read_matrix(a.projected, chunk),
                                                     store::read_matrix(a.replaced, chunk));
    ordered_json params{{"inputs", a.inputs}, {"projected", a.projected}, {"replaced", a.replaced}};
    store::write_text_file(cfg.output, diagnostics::to_json(table, params, a.rows).dump(2) + "\n");
    out << diagnostics::format_table(table);
    out << "report " << cfg.output << "\n";
}

void cmd_diagnose_evr(const PipelineConfig& cfg, const DiagnoseArgs& a, std::ostream& out) {
    require(cfg.output, "output");
    std::vector<double> values;
    ordered_json params;
    if (!a.values.empty()) {
        require_input(a.values, "values");
        try {
            values = nlohmann::json::parse(store::read_text_file(a.values)).get<std::vector<double>>();
        } catch (const nlohmann::json::exception& e) {
            throw FormatError(a.values + " must hold a JSON array of numbers: " + e.what());
        }
        params["values"] = a.values;
    } else if (!cfg.embeddings.empty()) {
        require_input(cfg.embeddings, "embeddings");
        const auto data = store::read_matrix(cfg.embeddings, effective_chunk_rows(cfg));
        values = spectral::compute_spectrum(data, a.center).values;
        params["embeddings"] = cfg.embeddings;
        params["center"] = a.center;
    } else {
        throw ConfigError("evr needs --values or --embeddings");
    }
    const auto curve = diagnostics::evr_curve(values);
    store::write_text_file(cfg.output, diagnostics::evr_json(curve, params).dump(2) + "\n");
    out << diagnostics::format_table(curve);
    out << "report " << cfg.output << "\n";
}

struct PathArgs {
    std::size_t from = 0, to = 0, steps = 0, row = 0, component = 0;
    std::string offsets;
    std::string units = "embedding";
};

void cmd_interpolate(const PipelineConfig& cfg, const PathArgs& a, std::ostream& out) {
    require_input(cfg.embeddings, "embeddings");
    require(cfg.output, "output");
    const auto edition = load_edition(cfg);
    const auto data = store::read_matrix(cfg.embeddings, effective_chunk_rows(cfg));
    const auto va = to_working(input_row(data, a.from, "--from"), edition);
    const auto vb = to_working(input_row(data, a.to, "--to"), edition);
    const auto path = subspace::interpolate(va, vb, edition.subspace, a.steps);
    std::vector<store::SourceRef> sources{source(cfg.embeddings), source(cfg.subspace)};
    write_embeddings(to_output(path, edition), cfg.output, sources, effective_chunk_rows(cfg),
                     {{"from_row", a.from}, {"to_row", a.to}, {"steps", a.steps}});
    out << "wrote " << path.size() << " interpolants to " << cfg.output << "\n";
}

void cmd_traverse(const PipelineConfig& cfg, const PathArgs& a, std::ostream& out) {
    require_input(cfg.embeddings, "embeddings");
    require(cfg.output, "output");
    subspace::OffsetUnits units;
    if (a.units == "embedding") {
        units = subspace::OffsetUnits::embedding;
    } else if (a.units == "stddev") {
        units = subspace::OffsetUnits::stddev;
    } else {
        throw ConfigError("--units must be 'embedding' or 'stddev'");
    }
    const auto offsets = parse_offsets(a.offsets);
    const auto edition = load_edition(cfg);
    const auto data = store::read_matrix(cfg.embeddings, effective_chunk_rows(cfg));
    const auto v = to_working(input_row(data, a.row, "--row"), edition);
    const auto path = subspace::traverse(v, edition.subspace, a.component, offsets, units);
    std::vector<store::SourceRef> sources{source(cfg.embeddings), source(cfg.subspace)};
    write_embeddings(to_output(path, edition), cfg.output, sources, effective_chunk_rows(cfg),
                     {{"row", a.row}, {"component", a.component}, {"offsets", offsets}, {"units", a.units}});
    out << "wrote " << path.size() << " traversal points to " << cfg.output << "\n";
}

// Finds "--config X" / "--config=X" ahead of the real parse so that file
// values land in cfg before flags overwrite them.
std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ConfigError("--config needs a path");
            return args[i + 1];
        }
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

}  // namespace

void apply_config_json(std::string_view json_text, PipelineConfig& cfg) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    const std::map<std::string, std::function<void(const nlohmann::json&)>> setters = {
        {"corpus", [&](const auto& v) { cfg.corpus = v.template get<std::string>(); }},
        {"embeddings", [&](const auto& v) { cfg.embeddings = v.template get<std::string>(); }},
        {"reducer", [&](const auto& v) { cfg.reducer = v.template get<std::string>(); }},
        {"subspace", [&](const auto& v) { cfg.subspace = v.template get<std::string>(); }},
        {"output", [&](const auto& v) { cfg.output = v.template get<std::string>(); }},
        {"threshold", [&](const auto& v) { cfg.threshold = v.template get<double>(); }},
        {"target_dim", [&](const auto& v) { cfg.target_dim = v.template get<std::size_t>(); }},
        {"seed", [&](const auto& v) { cfg.seed = v.template get<std::uint64_t>(); }},
        {"mode", [&](const auto& v) { cfg.mode = v.template get<std::string>(); }},
        {"chunk_rows", [&](const auto& v) { cfg.chunk_rows = v.template get<std::size_t>(); }},
    };
    for (const auto& [key, value] : j.items()) {
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
        const bool numeric_key = key == "threshold" || key == "target_dim" || key == "seed" || key == "chunk_rows";
        if (numeric_key ? !value.is_number() : !value.is_string()) {
            throw ConfigError("config key '" + key + "' has the wrong type");
        }
        if ((key == "target_dim" || key == "seed" || key == "chunk_rows") && !value.is_number_unsigned()) {
            throw ConfigError("config key '" + key + "' must be a nonnegative integer");
        }
        it->second(value);
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    PipelineConfig cfg;
    GenPromptsArgs gen;
    DiagnoseArgs diag;
    PathArgs path;
    std::string concept_spec, orthogonal = "zero", config_path;
    bool strict = false;
    std::uint64_t seed = 0;
    int threads = 0;

    CLI::App app{"Concept-subspace editions of text-to-image text embeddings", "editioner"};
    app.require_subcommand(1);
    app.add_option("--threads", threads, "OpenMP thread count (results do not depend on it)");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config; flags take precedence");
        sub->add_option("--chunk-rows", cfg.chunk_rows, "rows per streaming chunk");
    };

    auto* gen_cmd = app.add_subcommand("gen-prompts", "write a template prompt corpus");
    add_common(gen_cmd);
    gen_cmd->add_option("--wordlist", gen.wordlist, "JSON word lists (default: built-in)");
    gen_cmd->add_option("--concept", gen.concept_spec, "keep prompts with slot=word");
    gen_cmd->add_flag("--eval", gen.eval, "sample an evaluation set from the complement categories");
    gen_cmd->add_option("--per-category", gen.per_category, "evaluation prompts per complement category");
    auto* seed_opt = gen_cmd->add_option("--seed", seed, "sampling seed");
    gen_cmd->add_option("--output", cfg.output, "corpus text file");
    gen_cmd->add_option("--replaced-output", gen.replaced_output, "also write concept-substituted prompts");

    auto* red_cmd = app.add_subcommand("build-reducer", "global PCA reducer over an embedding corpus");
    add_common(red_cmd);
    red_cmd->add_option("--embeddings", cfg.embeddings, "NPY embedding matrix");
    red_cmd->add_option("--target-dim", cfg.target_dim, "reduced dimension");
    red_cmd->add_option("--output", cfg.output, "reducer NPY path");

    auto* sub_cmd = app.add_subcommand("build-subspace", "concept subspace from concept embeddings");
    add_common(sub_cmd);
    sub_cmd->add_option("--embeddings", cfg.embeddings, "NPY concept embeddings");
    sub_cmd->add_option("--reducer", cfg.reducer, "reduce embeddings first");
    sub_cmd->add_option("--concept", concept_spec, "slot=word the data represents");
    sub_cmd->add_option("--threshold", cfg.threshold, "explained-variance threshold for k");
    sub_cmd->add_option("--output", cfg.output, "subspace NPY path");

    auto* proj_cmd = app.add_subcommand("project", "project embeddings into a concept subspace");
    add_common(proj_cmd);
    proj_cmd->add_option("--embeddings", cfg.embeddings, "NPY embeddings");
    proj_cmd->add_option("--subspace", cfg.subspace, "subspace artifact");
    proj_cmd->add_option("--reducer", cfg.reducer, "reducer the subspace lives in; output is lifted back");
    proj_cmd->add_option("--mode", cfg.mode, "compensated | naive");
    proj_cmd->add_option("--orthogonal", orthogonal, "zero | exclude rows orthogonal to the subspace");
    proj_cmd->add_flag("--strict", strict, "fail when any row is orthogonal to the subspace");
    proj_cmd->add_option("--output", cfg.output, "projected NPY path");

    auto* diag_cmd = app.add_subcommand("diagnose", "embedding diagnostics");
    diag_cmd->require_subcommand(1);
    auto* shell_cmd = diag_cmd->add_subcommand("shell", "distance-to-origin statistics");
    add_common(shell_cmd);
    shell_cmd->add_option("--embeddings", cfg.embeddings, "NPY embeddings");
    shell_cmd->add_option("--bins", diag.bins, "also write a histogram CSV with this many bins");
    shell_cmd->add_flag("--rows", diag.rows, "include per-row norms in the report");
    shell_cmd->add_option("--output", cfg.output, "JSON report path");
    auto* sim_cmd = diag_cmd->add_subcommand("similarity", "cosine distances input/projected vs replaced");
    add_common(sim_cmd);
    sim_cmd->add_option("--inputs", diag.inputs, "NPY input embeddings");
    sim_cmd->add_option("--projected", diag.projected, "NPY projected embeddings");
    sim_cmd->add_option("--replaced", diag.replaced, "NPY replaced-prompt embeddings");
    sim_cmd->add_flag("--rows", diag.rows, "include per-row distances in the report");
    sim_cmd->add_option("--output", cfg.output, "JSON report path");
    auto* evr_cmd = diag_cmd->add_subcommand("evr", "cumulative explained-variance curve");
    add_common(evr_cmd);
    evr_cmd->add_option("--values", diag.values, "JSON array of principal values");
    evr_cmd->add_option("--embeddings", cfg.embeddings, "NPY embeddings to decompose");
    evr_cmd->add_flag("--center", diag.center, "center before decomposing --embeddings");
    evr_cmd->add_option("--output", cfg.output, "JSON report path");

    auto* interp_cmd = app.add_subcommand("interpolate", "linear path between two projected embeddings");
    add_common(interp_cmd);
    interp_cmd->add_option("--embeddings", cfg.embeddings, "NPY embeddings holding both endpoints");
    interp_cmd->add_option("--subspace", cfg.subspace, "subspace artifact");
    interp_cmd->add_option("--reducer", cfg.reducer, "reducer the subspace lives in");
    interp_cmd->add_option("--from", path.from, "row of the start embedding");
    interp_cmd->add_option("--to", path.to, "row of the end embedding");
    interp_cmd->add_option("--steps", path.steps, "number of points including endpoints")->default_val(5);
    interp_cmd->add_option("--output", cfg.output, "NPY path");

    auto* trav_cmd = app.add_subcommand("traverse", "move a projected embedding along a principal axis");
    add_common(trav_cmd);
    trav_cmd->add_option("--embeddings", cfg.embeddings, "NPY embeddings");
    trav_cmd->add_option("--subspace", cfg.subspace, "subspace artifact");
    trav_cmd->add_option("--reducer", cfg.reducer, "reducer the subspace lives in");
    trav_cmd->add_option("--row", path.row, "row of the embedding to move");
    trav_cmd->add_option("--component", path.component, "principal axis index (0-based)");
    trav_cmd->add_option("--offsets", path.offsets, "comma-separated offsets, e.g. -2,-1,0,1,2");
    trav_cmd->add_option("--units", path.units, "embedding | stddev");
    trav_cmd->add_option("--output", cfg.output, "NPY path");

    try {
        if (const auto cfg_file = find_config_path(args)) {
            if (!fs::exists(*cfg_file)) throw ConfigError("config file does not exist: " + *cfg_file);
            apply_config_json(store::read_text_file(*cfg_file), cfg);
        }

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp& e) {
            out << app.help();
            return 0;
        } catch (const CLI::CallForAllHelp& e) {
            out << app.help("", CLI::AppFormatMode::All);
            return 0;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << "\n";
            return 2;
        }
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (threads > 0) kernels::set_threads(threads);

        if (*gen_cmd) {
            cmd_gen_prompts(cfg, gen, out);
        } else if (*red_cmd) {
            cmd_build_reducer(cfg, out);
        } else if (*sub_cmd) {
            cmd_build_subspace(cfg, concept_spec, out);
        } else if (*proj_cmd) {
            cmd_project(cfg, orthogonal, strict, out, err);
        } else if (*shell_cmd) {
            cmd_diagnose_shell(cfg, diag, out);
        } else if (*sim_cmd) {
            cmd_diagnose_similarity(cfg, diag, out);
        } else if (*evr_cmd) {
            cmd_diagnose_evr(cfg, diag, out);
        } else if (*interp_cmd) {
            cmd_interpolate(cfg, path, out);
        } else if (*trav_cmd) {
            cmd_traverse(cfg, path, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::bad_alloc&) {
        err << "error: out of memory\n";
        return 3;
    }
    return 0;
}

}  // namespace editioner::cli
