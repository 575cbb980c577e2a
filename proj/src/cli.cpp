#include "solaudit/cli.hpp"

#include "solaudit/config.hpp"
#include "solaudit/error.hpp"
#include "solaudit/evalharness.hpp"
#include "solaudit/hash.hpp"
#include "solaudit/reporting.hpp"
#include "solaudit/serialization.hpp"
#include "solaudit/slicer.hpp"
#include "solaudit/vector_kb.hpp"
#include "solaudit/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace solaudit {

namespace {

namespace fs = std::filesystem;

struct Binding {
    CLI::Option* option = nullptr;
    std::string key;
    std::string value;
    bool flag = false;
};

struct Settings {
    std::string config_path;
    std::vector<std::string> sets;
    std::vector<std::shared_ptr<Binding>> bindings;
};

void setup_logging(const std::string& level) {
    static std::once_flag once;
    std::call_once(once, [] {
        auto logger = spdlog::stderr_color_mt("solaudit");
        logger->set_pattern("[%l] %v");
        spdlog::set_default_logger(logger);
    });
    spdlog::set_level(spdlog::level::from_str(level));
}

// Registers `--name` as an override of config key `key`.
void bind_option(CLI::App* cmd, Settings& settings, const std::string& name,
                 const std::string& key, const std::string& help) {
    auto b = std::make_shared<Binding>();
    b->key = key;
    b->option = cmd->add_option(name, b->value, help);
    settings.bindings.push_back(b);
}

void bind_flag(CLI::App* cmd, Settings& settings, const std::string& name, const std::string& key,
               const std::string& help) {
    auto b = std::make_shared<Binding>();
    b->key = key;
    b->flag = true;
    b->value = "true";
    b->option = cmd->add_flag(name, help);
    settings.bindings.push_back(b);
}

// Defaults, then the config file, then --set entries, then dedicated flags.
AppConfig resolve_config(const Settings& settings) {
    AppConfig config;
    if (!settings.config_path.empty()) config = load_config(settings.config_path, config);
    for (const auto& entry : settings.sets) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::InvalidConfig, "--set expects key=value, got '" + entry + "'");
        }
        apply_config_value(config, entry.substr(0, eq), entry.substr(eq + 1));
    }
    for (const auto& b : settings.bindings) {
        if (b->option->count() > 0) apply_config_value(config, b->key, b->value);
    }
    config.validate();
    setup_logging(config.log_level);
    return config;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

struct SolFile {
    fs::path path;
    std::string name;  // relative to the walked root, or the file name
};

std::vector<SolFile> list_sol_files(const fs::path& root) {
    std::vector<SolFile> files;
    if (fs::is_regular_file(root)) {
        files.push_back({root, root.filename().generic_string()});
        return files;
    }
    if (!fs::is_directory(root)) throw Error(ErrorKind::IoFailure, "no such file or directory: " + root.string());
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".sol") {
            files.push_back({entry.path(), fs::relative(entry.path(), root).generic_string()});
        }
    }
    std::sort(files.begin(), files.end(),
              [](const SolFile& a, const SolFile& b) { return a.name < b.name; });
    return files;
}

struct CorpusCounts {
    std::size_t files = 0;
    std::size_t failed = 0;
    std::size_t functions = 0;
    std::size_t tagged = 0;
};

std::vector<ContextSlice> annotated_corpus(const fs::path& root, DepthBound bound,
                                           CorpusCounts& counts) {
    std::vector<ContextSlice> slices;
    for (const auto& file : list_sol_files(root)) {
        ++counts.files;
        const std::string text = read_file(file.path);
        std::vector<SourceUnit> units;
        try {
            units = parse_all(text, file.name);
        } catch (const Error& e) {
            spdlog::warn("skipping {}: {}", file.name, e.what());
            ++counts.failed;
            continue;
        }
        const auto annotations = extract_annotations(text);
        std::vector<SourceUnit> tagged;
        for (auto& unit : units) {
            SourceUnit u = tag_functions(std::move(unit), annotations).unit;
            counts.functions += u.functions.size();
            counts.tagged += static_cast<std::size_t>(std::count_if(
                u.functions.begin(), u.functions.end(),
                [](const FunctionUnit& f) { return !f.swc_tags.empty(); }));
            tagged.push_back(std::move(u));
        }
        auto corpus = build_corpus(tagged, bound, true);
        slices.insert(slices.end(), corpus.begin(), corpus.end());
    }
    return slices;
}

std::pair<std::size_t, std::size_t> insert_slices(VectorStore& store,
                                                  const std::vector<ContextSlice>& slices,
                                                  const EmbeddingProvider& provider) {
    std::vector<std::string> texts;
    texts.reserve(slices.size());
    for (const auto& s : slices) texts.push_back(s.assembled_text);
    const auto vectors = provider.embed_batch(texts);
    std::size_t inserted = 0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < slices.size(); ++i) {
        KnowledgeEntry entry{entry_id_for(slices[i]), vectors[i], slices[i].assembled_text,
                             slices[i].metadata, 0};
        if (store.contains(entry.entry_id)) {
            spdlog::warn("duplicate entry {} skipped", entry.entry_id);
            ++skipped;
            continue;
        }
        store.insert(std::move(entry));
        ++inserted;
    }
    return {inserted, skipped};
}

VectorStore load_kb(const fs::path& path) {
    if (!fs::exists(path)) throw Error(ErrorKind::IoFailure, "knowledge base not found: " + path.string());
    return VectorStore::load(path);
}

std::unique_ptr<EmbeddingProvider> embedder_for(const AppConfig& config, const VectorStore& kb) {
    auto provider = make_embedding_provider(config.embedding);
    if (provider->dim() != kb.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "embedding dim " + std::to_string(provider->dim()) +
                        " does not match knowledge base dim " + std::to_string(kb.dim()));
    }
    return provider;
}

void emit(const Json& j, const std::string& out_path, std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        out << text;
    } else {
        write_atomic(out_path, text);
    }
}

// ---- kb ------------------------------------------------------------------

int cmd_kb_build(const AppConfig& config, const std::string& src, const std::string& corpus_out,
                 std::ostream& out, std::ostream& err) {
    CorpusCounts counts;
    const auto slices = annotated_corpus(src, DepthBound{config.d_max}, counts);
    if (slices.empty()) {
        err << "error: no annotated functions found under " << src << "; knowledge base not written\n";
        return kExitUsage;
    }
    const auto provider = make_embedding_provider(config.embedding);
    VectorStore store(provider->dim());
    const auto [inserted, skipped] = insert_slices(store, slices, *provider);
    if (inserted == 0) {
        err << "error: no entries inserted; knowledge base not written\n";
        return kExitUsage;
    }
    if (!corpus_out.empty()) {
        std::ostringstream corpus;
        write_corpus(corpus, slices);
        write_atomic(corpus_out, corpus.str());
    }
    store.save(config.kb_path);
    out << "files: " << counts.files << "\n"
        << "failed: " << counts.failed << "\n"
        << "functions: " << counts.functions << "\n"
        << "tagged: " << counts.tagged << "\n"
        << "inserted: " << inserted << "\n"
        << "skipped: " << skipped << "\n"
        << "kb: " << config.kb_path.generic_string() << "\n";
    return kExitOk;
}

int cmd_kb_add(const AppConfig& config, const std::string& input, std::ostream& out,
               std::ostream& err) {
    std::vector<ContextSlice> slices;
    if (fs::path(input).extension() == ".jsonl") {
        std::ifstream in(input);
        if (!in) throw Error(ErrorKind::IoFailure, "cannot read " + input);
        slices = read_corpus(in);
    } else {
        CorpusCounts counts;
        slices = annotated_corpus(input, DepthBound{config.d_max}, counts);
    }
    const auto provider = make_embedding_provider(config.embedding);
    VectorStore store = fs::exists(config.kb_path) ? VectorStore::load(config.kb_path)
                                                   : VectorStore(provider->dim());
    if (store.dim() != provider->dim()) {
        err << "error: embedding dim " << provider->dim() << " does not match knowledge base dim "
            << store.dim() << "\n";
        return kExitUsage;
    }
    const auto [inserted, skipped] = insert_slices(store, slices, *provider);
    store.save(config.kb_path);
    out << "added: " << inserted << "\n"
        << "skipped: " << skipped << "\n"
        << "size: " << store.size() << "\n";
    return kExitOk;
}

int cmd_kb_stats(const AppConfig& config, std::ostream& out) {
    const VectorStore store = load_kb(config.kb_path);
    std::map<std::string, std::size_t> swc;
    std::set<std::string> contracts;
    for (const auto& e : store.entries()) {
        for (const auto& id : e->metadata.swc_types) ++swc[id];
        contracts.insert(e->metadata.source_file + "::" + e->metadata.contract_name);
    }
    Json j;
    j["path"] = config.kb_path.generic_string();
    j["dim"] = store.dim();
    j["entries"] = store.size();
    j["contracts"] = contracts.size();
    Json hist = Json::object();
    for (const auto& [id, n] : swc) hist[id] = n;
    j["swc_types"] = hist;
    out << j.dump(2) << "\n";
    return kExitOk;
}

// ---- slice ---------------------------------------------------------------

int cmd_slice(const AppConfig& config, const std::string& file, const std::string& contract,
              const std::string& function, bool annotated_only, std::ostream& out,
              std::ostream& err) {
    const std::string text = read_file(file);
    const std::string name = fs::path(file).filename().generic_string();
    const auto annotations = extract_annotations(text);
    std::vector<SourceUnit> units;
    for (auto& unit : parse_all(text, name)) {
        if (!contract.empty() && unit.contract_name != contract) continue;
        units.push_back(tag_functions(std::move(unit), annotations).unit);
    }
    if (units.empty()) {
        err << "error: contract '" << contract << "' not found in " << file << "\n";
        return kExitUsage;
    }
    const DepthBound bound{config.d_max};
    std::vector<ContextSlice> slices;
    if (!function.empty()) {
        for (const auto& unit : units) {
            for (std::size_t i = 0; i < unit.functions.size(); ++i) {
                if (unit.functions[i].name == function) slices.push_back(assemble_slice_at(unit, i, bound));
            }
        }
        if (slices.empty()) {
            err << "error: function '" << function << "' not found\n";
            return kExitUsage;
        }
    } else {
        slices = build_corpus(units, bound, annotated_only);
    }
    write_corpus(out, slices);
    return kExitOk;
}

// ---- audit ---------------------------------------------------------------

std::string default_timestamp() {
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != 0) {
        try {
            return format_utc_timestamp(std::stoll(epoch));
        } catch (const std::exception&) {
            spdlog::warn("ignoring malformed SOURCE_DATE_EPOCH");
        }
    }
    const auto now = std::chrono::system_clock::now();
    return format_utc_timestamp(
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

struct AuditFlags {
    std::string contract;
    std::string out_dir = ".";
    std::string generated_at;
    bool update_kb = false;
};

int cmd_audit(const AppConfig& config, const std::string& file, const AuditFlags& flags,
              std::ostream& out, std::ostream& err) {
    if (!fs::exists(config.kb_path)) {
        err << "error: knowledge base not found: " << config.kb_path.generic_string() << "\n";
        return kExitUsage;
    }
    VectorStore kb = VectorStore::load(config.kb_path);
    const auto embedder = embedder_for(config, kb);
    const auto llm = make_llm_provider(config.llm);

    VerifierOptions options;
    options.top_k = config.top_k;
    options.threshold = Threshold{config.theta};
    options.aggregation = config.aggregation;
    options.weights = config.layer_weights;
    options.parallelism = config.parallelism;
    if (config.severity_table_path) options.severity = SeverityTable::load(*config.severity_table_path);

    const std::string text = read_file(file);
    const std::string name = fs::path(file).filename().generic_string();
    std::vector<SourceUnit> units;
    for (auto& unit : parse_all(text, name)) {
        if (flags.contract.empty() || unit.contract_name == flags.contract) units.push_back(std::move(unit));
    }
    if (units.empty()) {
        err << "error: contract '" << flags.contract << "' not found in " << file << "\n";
        return kExitUsage;
    }

    const std::string generated_at =
        flags.generated_at.empty() ? default_timestamp() : flags.generated_at;
    const DepthBound bound{config.d_max};
    double overall = 0.0;
    bool kb_changed = false;
    for (const auto& unit : units) {
        std::vector<ContextSlice> slices;
        for (std::size_t i = 0; i < unit.functions.size(); ++i) {
            slices.push_back(assemble_slice_at(unit, i, bound));
        }
        const auto audits = verify_functions(slices, kb, *embedder, *llm, options);

        std::map<std::string, int> name_counts;
        for (const auto& fn : unit.functions) ++name_counts[fn.name];
        std::vector<std::vector<ReportItem>> item_lists;
        std::vector<FunctionSummary> summaries;
        for (std::size_t i = 0; i < slices.size(); ++i) {
            const bool overloaded = name_counts[slices[i].main_function.name] > 1;
            item_lists.push_back(render_function_report(audits[i], slices[i], unit.raw_lines, overloaded));
            summaries.push_back(summarize(audits[i], slices[i], overloaded));
        }
        const ContractReport report = aggregate_reports(
            item_lists, std::move(summaries), {unit.contract_name, name, generated_at});
        const fs::path report_path = fs::path(flags.out_dir) / (unit.contract_name + ".audit.json");
        write_atomic(report_path, emit_json(report));
        out << report_path.generic_string() << ": " << report.items.size()
            << " items, max risk " << report.max_risk << "\n";
        overall = std::max(overall, report.max_risk);

        if (flags.update_kb) {
            for (std::size_t i = 0; i < slices.size(); ++i) {
                const auto confirmed = confirmed_swc_ids(audits[i]);
                if (confirmed.empty() || !audits[i].retrieved.empty()) continue;
                const auto probe = embedder->embed(slices[i].assembled_text);
                const auto outcome = kb.dynamic_update(
                    slices[i], probe, Threshold{config.theta},
                    [&](const ContextSlice&) { return confirmed; });
                if (outcome.kind == UpdateKind::Inserted) {
                    kb_changed = true;
                    out << "kb: inserted " << *outcome.inserted_id << "\n";
                }
            }
        }
    }
    if (kb_changed) kb.save(config.kb_path);
    return overall < config.audit_gate ? kExitOk : kExitGate;
}

// ---- eval ----------------------------------------------------------------

struct EvalFlags {
    std::uint64_t seed = 0;
    std::size_t samples = 0;  // 0 = all
    std::size_t repeat = 1;
    std::string mutations;
    std::string mutation = "Combined";
    std::string thetas;
    std::string out;
};

std::vector<EvalSample> pick_samples(const VectorStore& kb, std::size_t limit, std::uint64_t seed) {
    auto samples = samples_from_kb(kb);
    std::sort(samples.begin(), samples.end(), [](const EvalSample& a, const EvalSample& b) {
        return a.entry_id < b.entry_id;
    });
    if (limit == 0 || limit >= samples.size()) return samples;
    const std::string salt = to_hex(seed);
    std::stable_sort(samples.begin(), samples.end(), [&](const EvalSample& a, const EvalSample& b) {
        return fnv1a64(salt + a.entry_id) < fnv1a64(salt + b.entry_id);
    });
    samples.resize(limit);
    std::sort(samples.begin(), samples.end(), [](const EvalSample& a, const EvalSample& b) {
        return a.entry_id < b.entry_id;
    });
    return samples;
}

MutationKind parse_kind(const std::string& text) {
    const auto kind = mutation_kind_from_string(text);
    if (!kind) throw Error(ErrorKind::InvalidConfig, "unknown mutation kind '" + text + "'");
    return *kind;
}

std::vector<MutationSpec> load_specs(const std::string& path, std::uint64_t seed) {
    std::vector<MutationSpec> specs;
    if (path.empty()) {
        for (const auto kind : {MutationKind::VariableRename, MutationKind::DeadCode,
                                MutationKind::CommentAdd, MutationKind::CommentRemove,
                                MutationKind::Combined}) {
            MutationSpec spec;
            spec.kind = kind;
            spec.seed = seed;
            specs.push_back(spec);
        }
        return specs;
    }
    try {
        const Json j = Json::parse(read_file(path));
        for (const auto& item : j) {
            MutationSpec spec;
            spec.kind = parse_kind(item.at("kind").get<std::string>());
            spec.rename_fraction = item.value("rename_fraction", spec.rename_fraction);
            spec.dead_blocks = item.value("dead_blocks", spec.dead_blocks);
            spec.comments_added = item.value("comments_added", spec.comments_added);
            spec.comment_remove_fraction =
                item.value("comment_remove_fraction", spec.comment_remove_fraction);
            spec.seed = item.value("seed", seed);
            spec.validate();
            specs.push_back(spec);
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::InvalidConfig, "bad mutation spec file: " + std::string(e.what()));
    }
    return specs;
}

Json recall_columns(const RetrievalMetrics& m, Json row) {
    for (const auto& [k, value] : m.recall_at) row["Recall@" + std::to_string(k) + " (%)"] = value;
    return row;
}

int cmd_eval_robustness(const AppConfig& config, const EvalFlags& flags, std::ostream& out) {
    const VectorStore kb = load_kb(config.kb_path);
    const auto embedder = embedder_for(config, kb);
    const auto samples = pick_samples(kb, flags.samples, flags.seed);
    Json rows = Json::array();
    for (std::size_t run = 0; run < std::max<std::size_t>(flags.repeat, 1); ++run) {
        auto specs = load_specs(flags.mutations, flags.seed);
        for (auto& s : specs) s.seed += run;
        const auto results = robustness_eval(kb, samples, specs, config.top_k, *embedder,
                                             DepthBound{config.d_max}, config.parallelism);
        for (const auto& r : results) {
            Json row;
            if (flags.repeat > 1) row["Run"] = run + 1;
            row["Mutation Type"] = std::string(mutation_label(r.spec.kind));
            row = recall_columns(r.metrics, row);
            row["MRR"] = r.metrics.mrr;
            row["Samples"] = r.metrics.n_samples;
            row["Failed"] = r.failed;
            row["Seed"] = r.spec.seed;
            rows.push_back(row);
        }
    }
    Json j;
    j["table"] = "robustness";
    j["k"] = config.top_k;
    j["embedding"] = embedder->name();
    j["rows"] = rows;
    emit(j, flags.out, out);
    return kExitOk;
}

std::vector<double> parse_thetas(const std::string& text) {
    if (text.empty()) return kDefaultThetas;
    std::vector<double> thetas;
    std::stringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        AppConfig scratch;
        apply_config_value(scratch, "theta", part);
        thetas.push_back(scratch.theta);
    }
    if (thetas.empty() || !std::is_sorted(thetas.begin(), thetas.end())) {
        throw Error(ErrorKind::InvalidConfig, "--thetas must be a non-empty ascending list");
    }
    return thetas;
}

int cmd_eval_threshold(const AppConfig& config, const EvalFlags& flags, std::ostream& out) {
    const auto thetas = parse_thetas(flags.thetas);
    const VectorStore kb = load_kb(config.kb_path);
    const auto embedder = embedder_for(config, kb);
    const auto samples = pick_samples(kb, flags.samples, flags.seed);
    MutationSpec spec;
    spec.kind = parse_kind(flags.mutation);
    spec.seed = flags.seed;
    std::vector<Probe> probes;
    for (const auto& s : samples) {
        try {
            probes.push_back(make_probe(s, spec, *embedder, DepthBound{config.d_max}));
        } catch (const std::exception& e) {
            spdlog::warn("sample {} excluded: {}", s.entry_id, e.what());
        }
    }
    Json rows = Json::array();
    for (const auto& r : threshold_sweep(kb, probes, thetas, config.top_k)) {
        Json row;
        row["Threshold"] = r.theta;
        row = recall_columns(r.metrics, row);
        row["Retention Rate (%)"] = r.metrics.retention_rate.value_or(0.0);
        rows.push_back(row);
    }
    Json j;
    j["table"] = "threshold";
    j["k"] = config.top_k;
    j["mutation"] = std::string(mutation_label(spec.kind));
    j["probes"] = probes.size();
    j["rows"] = rows;
    emit(j, flags.out, out);
    return kExitOk;
}

int cmd_eval_classify(const std::string& input, const EvalFlags& flags, std::ostream& out) {
    std::vector<Prediction> predictions;
    try {
        const std::string text = read_file(input);
        auto add = [&](const Json& item) {
            predictions.push_back({item.at("predicted").get<bool>(), item.at("actual").get<bool>()});
        };
        if (fs::path(input).extension() == ".jsonl") {
            std::istringstream lines(text);
            std::string line;
            while (std::getline(lines, line)) {
                if (line.find_first_not_of(" \t\r") != std::string::npos) add(Json::parse(line));
            }
        } else {
            for (const auto& item : Json::parse(text)) add(item);
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::ParseFailure, "bad predictions file: " + std::string(e.what()));
    }
    const auto m = classification_metrics(predictions);
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
    Json j;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["Accuracy (%)"] = opt(m.accuracy);
    j["Precision (%)"] = opt(m.precision);
    j["Recall (%)"] = opt(m.recall);
    j["F1 (%)"] = opt(m.f1);
    emit(j, flags.out, out);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Solidity bad-practice auditor", args.empty() ? "solaudit" : args.front()};
    app.set_version_flag("--version", "solaudit 0.1.0");
    app.require_subcommand(1);
    app.fallthrough();

    Settings settings;
    app.add_option("--config", settings.config_path, "Key-value config file");
    app.add_option("--set", settings.sets, "Override a config key (key=value); repeatable");
    bind_option(&app, settings, "--log-level", "log_level", "trace|debug|info|warn|error|off");

    // kb
    auto* kb = app.add_subcommand("kb", "Knowledge base management");
    kb->require_subcommand(1);
    std::string src;
    std::string corpus_out;
    auto* kb_build = kb->add_subcommand("build", "Build a knowledge base from annotated .sol files");
    kb_build->add_option("src", src, "Directory or .sol file")->required();
    kb_build->add_option("--corpus-out", corpus_out, "Also write the slice corpus as JSON-Lines");
    auto* kb_add = kb->add_subcommand("add", "Add a JSON-Lines corpus or annotated .sol files");
    kb_add->add_option("input", src, "corpus .jsonl, directory or .sol file")->required();
    auto* kb_stats = kb->add_subcommand("stats", "Summarize a knowledge base");
    for (auto* cmd : {kb_build, kb_add, kb_stats}) {
        bind_option(cmd, settings, "--kb", "kb_path", "Knowledge base file");
    }
    for (auto* cmd : {kb_build, kb_add}) {
        bind_option(cmd, settings, "--d-max", "d_max", "Dependency depth bound");
        bind_flag(cmd, settings, "--strip-comments", "embedding.strip_comments",
                  "Local embedding ignores comments");
    }

    // slice
    std::string file;
    std::string contract;
    std::string function;
    bool annotated_only = false;
    auto* slice = app.add_subcommand("slice", "Print context slices as JSON-Lines");
    slice->add_option("file", file, "Solidity file")->required();
    slice->add_option("--contract", contract, "Only this contract");
    slice->add_option("--function", function, "Only functions with this name");
    slice->add_flag("--annotated-only", annotated_only, "Only SWC-annotated functions");
    bind_option(slice, settings, "--d-max", "d_max", "Dependency depth bound");

    // audit
    AuditFlags audit_flags;
    auto* audit = app.add_subcommand("audit", "Audit a contract and write <contract>.audit.json");
    audit->add_option("file", file, "Solidity file")->required();
    audit->add_option("--contract", audit_flags.contract, "Only this contract");
    audit->add_option("--out-dir", audit_flags.out_dir, "Report directory");
    audit->add_option("--generated-at", audit_flags.generated_at,
                      "Report timestamp (default: SOURCE_DATE_EPOCH or now)");
    audit->add_flag("--update-kb", audit_flags.update_kb,
                    "Insert confirmed findings without a knowledge-base match");
    bind_option(audit, settings, "--kb", "kb_path", "Knowledge base file");
    bind_option(audit, settings, "--theta", "theta", "Similarity threshold");
    bind_option(audit, settings, "--k", "top_k", "Retrieved exemplars per function");
    bind_option(audit, settings, "--d-max", "d_max", "Dependency depth bound");
    bind_option(audit, settings, "--gate", "audit_gate", "Exit 2 when max risk reaches this");
    bind_option(audit, settings, "--llm-script", "llm.script", "Scripted LLM responses (JSON)");
    bind_option(audit, settings, "--severity-table", "severity_table", "SWC severity table (JSON)");
    bind_option(audit, settings, "--parallelism", "parallelism", "Functions verified at once");

    // eval
    EvalFlags eval_flags;
    auto* eval = app.add_subcommand("eval", "Evaluation harness");
    eval->require_subcommand(1);
    auto* robustness = eval->add_subcommand("robustness", "Retrieval robustness under mutations");
    robustness->add_option("--mutations", eval_flags.mutations, "Mutation spec JSON (default: all five)");
    robustness->add_option("--repeat", eval_flags.repeat, "Repetitions with consecutive seeds");
    auto* threshold = eval->add_subcommand("threshold", "Threshold sensitivity sweep");
    threshold->add_option("--thetas", eval_flags.thetas, "Comma-separated ascending thresholds");
    threshold->add_option("--mutation", eval_flags.mutation, "Mutation applied to probes");
    for (auto* cmd : {robustness, threshold}) {
        cmd->add_option("--seed", eval_flags.seed, "Mutation seed");
        cmd->add_option("--samples", eval_flags.samples, "Sample this many entries (0 = all)");
        cmd->add_option("--out", eval_flags.out, "Write the table here instead of stdout");
        bind_option(cmd, settings, "--kb", "kb_path", "Knowledge base file");
        bind_option(cmd, settings, "--k", "top_k", "Retrieval depth");
        bind_option(cmd, settings, "--d-max", "d_max", "Dependency depth bound");
        bind_flag(cmd, settings, "--strip-comments", "embedding.strip_comments",
                  "Local embedding ignores comments");
    }
    std::string predictions;
    auto* classify = eval->add_subcommand("classify", "Accuracy, recall and F1 of predictions");
    classify->add_option("predictions", predictions, "JSON array or JSON-Lines of {predicted, actual}")
        ->required();
    classify->add_option("--out", eval_flags.out, "Write the result here instead of stdout");

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend() - (args.empty() ? 0 : 1)));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const AppConfig config = resolve_config(settings);
        if (kb_build->parsed()) return cmd_kb_build(config, src, corpus_out, out, err);
        if (kb_add->parsed()) return cmd_kb_add(config, src, out, err);
        if (kb_stats->parsed()) return cmd_kb_stats(config, out);
        if (slice->parsed()) return cmd_slice(config, file, contract, function, annotated_only, out, err);
        if (audit->parsed()) return cmd_audit(config, file, audit_flags, out, err);
        if (robustness->parsed()) return cmd_eval_robustness(config, eval_flags, out);
        if (threshold->parsed()) return cmd_eval_threshold(config, eval_flags, out);
        if (classify->parsed()) return cmd_eval_classify(predictions, eval_flags, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace solaudit
