// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include "kb_builder.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

#include <solaudit/cli.hpp>
#include <solaudit/error.hpp>
#include <solaudit/evalharness.hpp>
#include <solaudit/lexer.hpp>
#include <solaudit/reporting.hpp>
#include <solaudit/serialization.hpp>
#include <solaudit/slicer.hpp>
#include <solaudit/vector_kb.hpp>
#include <solaudit/verifier.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace solaudit;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kCosineRelTol = 1e-9;
constexpr double kScaleTol = 1e-9;
constexpr double kRiskTol = 1e-12;
constexpr double kSelfSimTol = 1e-9;
constexpr double kSliceSeconds = 1.0;
constexpr double kSmokeRecallAt1 = 90.0;

const std::string kFixtures = SOLAUDIT_FIXTURE_DIR;

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, a, b, c);
    return buf;
}

std::string ltrim(const std::string& s) {
    const auto p = s.find_first_not_of(" \t");
    return p == std::string::npos ? "" : s.substr(p);
}

// Lines [first, last] (1-based) of `lines`, the first one left-trimmed.
std::string block(const std::vector<std::string>& lines, int first, int last) {
    std::string out = ltrim(lines[first - 1]);
    for (int i = first + 1; i <= last; ++i) out += "\n" + lines[i - 1];
    return out;
}

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------

Outcome slicing_fidelity() {
    const std::string text = read(kFixtures + "/test_token.sol");
    const auto lines = split(text);
    // Hand-picked from the fixture: pragma, `balances`, `Transfer`, transfer, _logTransfer.
    const std::string expected = lines[0] + "\n\n" + ltrim(lines[3]) + "\n\n" + ltrim(lines[7]) + "\n\n" +
                                 block(lines, 17, 23) + "\n\n" + block(lines, 25, 27);
    const auto started = std::chrono::steady_clock::now();
    const auto unit = parse_source(text, "test_token.sol");
    const auto slice = assemble_slice(unit, "transfer", {});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const bool ok = slice.assembled_text == expected && seconds < kSliceSeconds;
    return {ok, fmt("text match=%g, %.4fs", slice.assembled_text == expected ? 1 : 0, seconds)};
}

Outcome depth_bound() {
    const std::string src =
        "contract Chain {\n"
        "  function a() public { b(); }\n"
        "  function b() internal { c(); }\n"
        "  function c() internal { d(); }\n"
        "  function d() internal { e(); }\n"
        "  function e() internal { }\n"
        "}\n";
    const auto g = build_call_graph(parse_source(src, "chain.sol"));
    const auto three = dependency_closure(g, "a", {3});
    const auto zero = dependency_closure(g, "a", {0});
    const bool ok = three == std::vector<std::string>{"b", "c", "d"} && zero.empty();
    std::string got;
    for (const auto& n : three) got += n;
    return {ok, "D(a,3)=[" + got + "], |D(a,0)|=" + std::to_string(zero.size())};
}

Outcome cosine_correctness() {
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> scale(1e-3, 1e3);
    double worst_rel = 0, worst_scale = 0;
    bool symmetric = true;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t dim = 2 + rng() % 63;
        std::vector<double> a(dim), b(dim);
        for (auto& x : a) x = n(rng);
        for (auto& x : b) x = n(rng);
        const double got = cosine_similarity(a, b);
        const long double want = oracle::cosine(a, b);
        worst_rel = std::max(worst_rel, static_cast<double>(std::fabs(got - want) / std::fabs(want)));
        symmetric &= got == cosine_similarity(b, a);
        const double c = scale(rng);
        auto cb = b;
        for (auto& x : cb) x *= c;
        worst_scale = std::max(worst_scale, std::fabs(cosine_similarity(a, cb) - got));
    }
    const bool ok = worst_rel <= kCosineRelTol && symmetric && worst_scale <= kScaleTol;
    return {ok, fmt("max rel err %.3e, symmetric=%g, max scale drift %.3e", worst_rel, symmetric ? 1 : 0, worst_scale)};
}

Outcome retrieval_exactness() {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> theta(-0.5, 0.99);
    constexpr std::size_t dim = 12;
    std::size_t queries = 0, mismatches = 0;
    for (const std::size_t size : {1u, 2u, 10u, 100u, 500u, 1000u}) {
        VectorStore store(dim);
        std::vector<oracle::Stored> mirror;
        std::vector<std::vector<double>> bases;
        for (std::size_t i = 0; i < size; ++i) {
            std::vector<double> v(dim);
            // Every third entry repeats an earlier direction, exactly or scaled by a power of two.
            if (!bases.empty() && rng() % 3 == 0) {
                v = bases[rng() % bases.size()];
                const double s = std::ldexp(1.0, static_cast<int>(rng() % 5) - 2);
                for (auto& x : v) x *= s;
            } else {
                for (auto& x : v) x = n(rng);
                bases.push_back(v);
            }
            const std::string id = "e" + std::to_string(rng() % 100000) + "_" + std::to_string(i);
            store.insert({id, EmbeddingVector(v), "", {}, 0});
            mirror.push_back({id, v, i});
        }
        for (int q = 0; q < 20; ++q) {
            std::vector<double> probe(dim);
            if (q % 4 == 0) {
                probe = mirror[rng() % mirror.size()].vector;
            } else {
                for (auto& x : probe) x = n(rng);
            }
            const std::size_t k = 1 + rng() % (size + 5);
            const double t = theta(rng);
            const auto hits = store.query_top_k(EmbeddingVector(probe), k);
            const auto want = oracle::top_k(mirror, probe, k);
            const auto above = store.query_threshold(EmbeddingVector(probe), {t});
            const auto want_above = oracle::above(mirror, probe, t);
            ++queries;
            bool same = hits.size() == want.size() && above.size() == want_above.size();
            for (std::size_t i = 0; same && i < hits.size(); ++i) {
                same = hits[i].entry->entry_id == want[i].id && hits[i].rank == i + 1 &&
                       std::fabs(hits[i].similarity - static_cast<double>(want[i].similarity)) < 1e-12;
            }
            for (std::size_t i = 0; same && i < above.size(); ++i) {
                same = above[i].entry->entry_id == want_above[i].id && above[i].rank == i + 1;
            }
            if (!same) ++mismatches;
        }
    }
    return {mismatches == 0, std::to_string(queries) + " queries, " + std::to_string(mismatches) + " mismatches"};
}

std::vector<ContextSlice> fifty_slices() { return synthetic::annotated_slices(synthetic::make_contracts(50)); }

Outcome threshold_sweep_shape() {
    const auto slices = fifty_slices();
    LocalEmbeddingProvider embedder(1536);
    const auto kb = synthetic::build_store(slices, embedder);
    // Probes from every mutation kind, so similarities spread across the sweep.
    std::vector<Probe> probes;
    for (const auto kind : {MutationKind::VariableRename, MutationKind::DeadCode, MutationKind::CommentAdd,
                            MutationKind::CommentRemove, MutationKind::Combined}) {
        MutationSpec spec;
        spec.kind = kind;
        spec.seed = 3;
        for (const auto& s : samples_from_kb(kb)) probes.push_back(make_probe(s, spec, embedder, {}));
    }
    const auto rows = threshold_sweep(kb, probes, kDefaultThetas, 10);
    bool ok = rows.size() == kDefaultThetas.size();
    std::string detail = "retention";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        detail += fmt(" %.2f", *rows[i].metrics.retention_rate);
        if (i == 0) continue;
        ok &= *rows[i].metrics.retention_rate <= *rows[i - 1].metrics.retention_rate;
        for (const int k : kDefaultRecallKs) {
            ok &= rows[i].metrics.recall_at.at(k) <= rows[i - 1].metrics.recall_at.at(k);
        }
    }
    // A sweep that never drops would pass vacuously.
    ok &= *rows.front().metrics.retention_rate > *rows.back().metrics.retention_rate;
    return {ok, detail + " over theta 0.70..0.95 (" + std::to_string(probes.size()) + " probes)"};
}

Outcome mutation_compliance() {
    const std::string text = read(kFixtures + "/vault.sol");
    const auto ids = renameable_identifiers(text);
    const auto comments = lex::lex_source(text).comments.size();
    auto run = [&](MutationKind kind) {
        MutationSpec s;
        s.kind = kind;
        s.seed = 1234;
        return mutate(text, s);
    };
    auto count = [](const std::string& hay, const std::string& needle) {
        std::size_t n = 0;
        for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
        return n;
    };
    const auto rename = run(MutationKind::VariableRename);
    std::size_t gone = 0;
    {
        const auto lexed = lex::lex_source(rename.text);
        std::set<std::string> tokens;
        for (const auto& t : lex::tokenize(lexed.code, lexed.lines)) tokens.insert(std::string(lex::token_text(lexed.code, t)));
        for (const auto& id : ids) gone += tokens.count(id) == 0 ? 1 : 0;
    }
    const auto dead = run(MutationKind::DeadCode);
    const auto added = run(MutationKind::CommentAdd);
    const auto removed = run(MutationKind::CommentRemove);
    const std::size_t dead_blocks = count(dead.text, "if (false)") - count(text, "if (false)");
    const std::size_t comments_added = lex::lex_source(added.text).comments.size() - comments;
    const std::size_t comments_removed = comments - lex::lex_source(removed.text).comments.size();
    bool deterministic = true;
    for (const auto kind : {MutationKind::VariableRename, MutationKind::DeadCode, MutationKind::CommentAdd,
                            MutationKind::CommentRemove, MutationKind::Combined}) {
        deterministic &= run(kind).text == run(kind).text;
    }
    const bool ok = ids.size() == 10 && comments == 10 && gone == 7 && dead_blocks == 3 &&
                    comments_added == 5 && comments_removed == 8 && deterministic;
    std::ostringstream d;
    d << ids.size() << " identifiers/" << comments << " comments: renamed " << gone << ", dead blocks "
      << dead_blocks << ", comments +" << comments_added << " -" << comments_removed
      << ", deterministic=" << deterministic;
    return {ok, d.str()};
}

Outcome metrics_oracle() {
    std::mt19937 rng(99);
    std::size_t mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        std::vector<std::optional<std::size_t>> ranks;
        const int n = 1 + static_cast<int>(rng() % 60);
        for (int j = 0; j < n; ++j) {
            const auto r = rng() % 13;
            ranks.push_back(r >= 10 ? std::nullopt : std::optional<std::size_t>(r + 1));
        }
        const auto got = compute_retrieval_metrics(ranks);
        const auto want = oracle::retrieval_metrics(ranks, {1, 3, 5, 10});
        if (got.recall_at != want.recall || got.mrr != want.mrr) ++mismatches;
    }
    const auto worked = compute_retrieval_metrics({2, std::nullopt});
    const bool ok = mismatches == 0 && worked.recall_at.at(3) == 50.0 && worked.mrr == 0.25;
    return {ok, "200 lists, " + std::to_string(mismatches) + " mismatches; [2, absent] -> " +
                    fmt("Recall@3 %.2f%%, MRR %.4f", worked.recall_at.at(3), worked.mrr)};
}

Outcome robustness_smoke() {
    const auto slices = fifty_slices();
    LocalEmbeddingProvider embedder(1536, true);
    const auto kb = synthetic::build_store(slices, embedder);
    std::vector<MutationSpec> specs(2);
    specs[0].kind = MutationKind::CommentAdd;
    specs[1].kind = MutationKind::CommentRemove;
    for (auto& s : specs) s.seed = 2024;
    const auto rows = robustness_eval(kb, samples_from_kb(kb), specs, 10, embedder, {}, 4);
    bool ok = kb.size() == 50 && rows.size() == 2;
    std::string detail = std::to_string(kb.size()) + " slices;";
    for (const auto& r : rows) {
        ok &= r.metrics.n_samples == 50 && r.metrics.recall_at.at(1) >= kSmokeRecallAt1;
        detail += " " + std::string(mutation_label(r.spec.kind)) + fmt(" R@1 %.2f%% MRR %.4f", r.metrics.recall_at.at(1), r.metrics.mrr);
    }
    return {ok, detail};
}

Outcome risk_scoring() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    bool invariant = true, bounded = true;
    for (int i = 0; i < 10000; ++i) {
        std::array<double, 3> s{u(rng), u(rng), u(rng)};
        if (i % 10 == 0) s[rng() % 3] = 0.0;
        if (i % 15 == 0) s[rng() % 3] = 1.0;
        auto score = [](const std::array<double, 3>& v) {
            return risk_score({{LayerId::Syntax, v[0]}, {LayerId::DesignPattern, v[1]}, {LayerId::Architecture, v[2]}});
        };
        const double r = score(s);
        const long double mean = (static_cast<long double>(s[0]) + s[1] + s[2]) / 3.0L;
        worst = std::max(worst, static_cast<double>(std::fabs(r - mean)));
        bounded &= r >= 0.0 && r <= 1.0;
        auto p = s;
        std::sort(p.begin(), p.end());
        do {
            invariant &= score(p) == r;
        } while (std::next_permutation(p.begin(), p.end()));
    }
    const double worked = risk_score({{LayerId::Syntax, 0.9}, {LayerId::DesignPattern, 0.0}, {LayerId::Architecture, 0.9}});
    const bool ok = worst <= kRiskTol && invariant && bounded && std::fabs(worked - 0.6) <= kRiskTol;
    return {ok, fmt("max |score-mean| %.3e, (0.9,0,0.9) -> %.15f, permutation-invariant=%g", worst, worked, invariant ? 1 : 0)};
}

Outcome end_to_end() {
    const auto dir = fs::temp_directory_path() / "solaudit_acceptance_e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ostringstream sink, errs;
    const auto kb = (dir / "corpus.kb").string();
    if (run_cli({"solaudit", "kb", "build", kFixtures + "/kb_corpus", "--kb", kb, "--log-level", "off"}, sink, errs) != kExitOk) {
        return {false, "kb build failed: " + errs.str()};
    }
    std::vector<std::string> outputs;
    std::vector<int> codes;
    for (int i = 0; i < 3; ++i) {
        const auto out_dir = dir / ("run" + std::to_string(i));
        codes.push_back(run_cli({"solaudit", "audit", kFixtures + "/proxy.sol", "--kb", kb, "--llm-script",
                                 kFixtures + "/scripts/proxy_mock.json", "--out-dir", out_dir.string(),
                                 "--generated-at", "2025-01-01T00:00:00Z", "--log-level", "off"},
                                sink, errs));
        outputs.push_back(read(out_dir / "Proxy.audit.json"));
    }
    const bool identical = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
    bool has_item = false;
    const auto j = Json::parse(outputs[0]);
    for (const auto& item : j["items"]) {
        bool complete = true;
        for (const char* key : {"ID", "Title", "Type", "CodeBlock", "Location", "RiskScore", "Reason", "Suggestions"}) {
            complete &= item.contains(key) && !item[key].is_null();
        }
        has_item |= complete && item["Type"] == "SWC-112";
    }
    const bool exit2 = std::all_of(codes.begin(), codes.end(), [](int c) { return c == kExitGate; });
    return {identical && has_item && exit2,
            "byte-identical=" + std::to_string(identical) + ", SWC-112 item=" + std::to_string(has_item) +
                ", exit codes " + std::to_string(codes[0]) + std::to_string(codes[1]) + std::to_string(codes[2]) +
                fmt(", max_risk %.4f", j["max_risk"].get<double>())};
}

Outcome dynamic_update() {
    LocalEmbeddingProvider embedder(1536);
    VectorStore kb = synthetic::build_store(fifty_slices(), embedder);
    const std::string text = read(kFixtures + "/kb_corpus/bank.sol");
    const auto slice = assemble_slice(parse_source(text, "bank.sol"), "withdraw", {});
    const auto probe = embedder.embed(slice.assembled_text);
    const Threshold theta{0.9};
    const bool no_match = kb.query_threshold(probe, theta).empty();
    const std::size_t before = kb.size();

    const auto llm = ScriptedLlmProvider::from_json_text(R"({"rules": [{"system_contains": "layer 1 of 3",
        "response": [{"swc_id": "SWC-107", "title": "Reentrancy", "reason": "state updated after call"}]}]})");
    const auto verifier = [&](const ContextSlice& s) {
        return confirmed_swc_ids(verify_with_hits(s, {}, llm, {}));
    };
    const auto outcome = kb.dynamic_update(slice, probe, theta, verifier);
    const auto hits = kb.query_top_k(probe, 1);
    const bool found = !hits.empty() && outcome.inserted_id && hits[0].entry->entry_id == *outcome.inserted_id &&
                       std::fabs(hits[0].similarity - 1.0) <= kSelfSimTol &&
                       hits[0].entry->metadata.swc_types.count("SWC-107") == 1;
    const bool ok = no_match && outcome.kind == UpdateKind::Inserted && kb.size() == before + 1 && found;
    return {ok, "size " + std::to_string(before) + " -> " + std::to_string(kb.size()) +
                    (hits.empty() ? "" : fmt(", re-query similarity %.12f", hits[0].similarity))};
}

Outcome classification() {
    const auto m = classification_metrics({{true, true}, {true, false}, {false, true}, {false, false}});
    const bool ok = m.accuracy == 50.0 && m.recall == 50.0 && m.f1 == 50.0 && m.precision == 50.0;
    return {ok, fmt("Acc %.2f%%, Rec %.2f%%, F1 %.2f%%", m.accuracy.value_or(-1), m.recall.value_or(-1), m.f1.value_or(-1))};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"slicing fidelity", slicing_fidelity},
        {"depth bound", depth_bound},
        {"cosine correctness", cosine_correctness},
        {"retrieval exactness", retrieval_exactness},
        {"threshold sweep shape", threshold_sweep_shape},
        {"mutation compliance", mutation_compliance},
        {"metrics oracle", metrics_oracle},
        {"robustness smoke", robustness_smoke},
        {"risk scoring", risk_scoring},
        {"end-to-end determinism", end_to_end},
        {"dynamic update", dynamic_update},
        {"classification metrics", classification},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << "\n";
        failed += o.pass ? 0 : 1;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
