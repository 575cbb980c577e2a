#include <doctest.h>

#include <solaudit/error.hpp>
#include <solaudit/verifier.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

using namespace solaudit;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(SOLAUDIT_FIXTURE_DIR) + "/" + name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

ContextSlice proxy_forward() {
    const auto unit = parse_source(fixture("proxy.sol"), "proxy.sol");
    return assemble_slice(unit, "forward", {});
}

RetrievalHit hit(const std::string& id, double sim, std::size_t rank) {
    auto e = std::make_shared<KnowledgeEntry>();
    e->entry_id = id;
    e->vector = EmbeddingVector({1.0, 0.0});
    e->slice_text = "function " + id + "() public { }";
    e->metadata.swc_types = {"SWC-107"};
    return {e, sim, rank};
}

const std::string kSwc112 =
    R"([{"swc_id":"SWC-112","title":"Delegatecall to untrusted callee","severity":0.9,)"
    R"("reason":"caller controls the target","location":"L7"}])";

// Scripted provider: the same finding for the listed layers, nothing elsewhere.
CallbackLlmProvider flag_layers(std::set<int> flagged, std::string response) {
    return CallbackLlmProvider([flagged, response](const Prompt& p) {
        for (int l : flagged) {
            if (p.system.find("Verification layer " + std::to_string(l) + " of 3") != std::string::npos) {
                return response;
            }
        }
        return std::string("[]");
    });
}

VectorStore empty_kb() { return VectorStore(64); }

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("three layers in fixed order") {
    const auto& ls = layers();
    CHECK(ls[0].id == LayerId::Syntax);
    CHECK(ls[1].id == LayerId::DesignPattern);
    CHECK(ls[2].id == LayerId::Architecture);
    CHECK(ls[0].step_back_question == "What are the fundamental syntax-level security requirements?");
    CHECK(ls[1].step_back_question == "What design principles should this pattern follow?");
    CHECK(ls[2].step_back_question == "What are the system-level security implications?");
    CHECK(layer_from_string(to_string(LayerId::Architecture)) == LayerId::Architecture);
}

TEST_CASE("prompt construction") {
    const auto slice = proxy_forward();
    const auto p = build_prompt(layer(LayerId::Syntax), slice, {});
    CHECK(p.system.find("What are the fundamental syntax-level security requirements?") != std::string::npos);
    CHECK(p.user.find("### Exemplar") == std::string::npos);
    CHECK(p.user.find("exemplars: none") != std::string::npos);
    CHECK(p.user.find(slice.assembled_text) != std::string::npos);
    CHECK(p == build_prompt(layer(LayerId::Syntax), slice, {}));

    const std::vector<RetrievalHit> hits{hit("first", 0.99, 1), hit("second", 0.95, 2), hit("third", 0.93, 3)};
    const auto q = build_prompt(layer(LayerId::Architecture), slice, hits);
    const auto a = q.user.find("first");
    const auto b = q.user.find("second");
    const auto c = q.user.find("third");
    CHECK(a != std::string::npos);
    CHECK(a < b);
    CHECK(b < c);
    CHECK(q.user.find("similarity 0.9900") != std::string::npos);
}

TEST_CASE("response parsing") {
    const auto table = SeverityTable::defaults();
    auto r = parse_findings(kSwc112, LayerId::Syntax, table);
    REQUIRE(r.findings.size() == 1);
    CHECK(r.findings[0].swc_id == "SWC-112");
    CHECK(r.findings[0].severity == doctest::Approx(0.9));
    CHECK(r.findings[0].layer == LayerId::Syntax);
    CHECK(r.findings[0].location == CodeLocation{7, 7});

    CHECK(parse_findings("[]", LayerId::Syntax, table).findings.empty());
    CHECK(parse_findings("  ", LayerId::Syntax, table).findings.empty());

    r = parse_findings("Here is what I found: [{\"title\":\"x [y]\",\"category\":\"Readability\","
                       "\"severity\":0.3}] hope it helps",
                       LayerId::DesignPattern, table);
    REQUIRE(r.findings.size() == 1);
    CHECK(r.findings[0].title == "x [y]");
    CHECK(r.findings[0].severity == doctest::Approx(0.3));

    r = parse_findings(R"([{"title":"a","location":"7-L9"},{"nothing":1}])", LayerId::Syntax, table);
    CHECK(r.findings.size() == 1);
    CHECK(r.findings[0].location == CodeLocation{7, 9});
    CHECK(r.warnings.size() == 1);

    CHECK_THROWS_AS(parse_findings("no findings here", LayerId::Syntax, table), Error);
    CHECK_THROWS_AS(parse_findings(R"([{"x":1}])", LayerId::Syntax, table), Error);
}

TEST_CASE("severity table") {
    const auto t = SeverityTable::defaults();
    CHECK(t.resolve(std::string("SWC-107")) == doctest::Approx(0.88));
    CHECK(t.resolve(std::string("SWC-107"), 0.1) == doctest::Approx(0.88));
    CHECK(t.resolve(std::nullopt, 0.6) == doctest::Approx(0.6));
    CHECK(t.resolve(std::nullopt, 7.0) == doctest::Approx(0.7));
    CHECK(t.resolve(std::nullopt) == doctest::Approx(0.5));
    CHECK(t.resolve(std::string("SWC-999")) == doctest::Approx(0.5));
    CHECK_NOTHROW(t.validate());
    SeverityTable bad;
    bad.scores["SWC-101"] = 11;
    CHECK_THROWS_AS(bad.validate(), Error);
    const auto parsed = SeverityTable::from_json_text(R"({"default": 4.0, "scores": {"SWC-101": 7.5}})");
    CHECK(parsed.default_score == 4.0);
    CHECK(parsed.scores.at("SWC-101") == 7.5);

    const auto shipped = SeverityTable::load(std::string(SOLAUDIT_FIXTURE_DIR) + "/../../data/severity_table.json");
    CHECK(shipped == t);
}

TEST_CASE("layer aggregation") {
    CHECK(aggregate_layer_severity({}, LayerId::Syntax) == 0.0);
    LayerFinding a;
    a.severity = 0.3;
    LayerFinding b;
    b.severity = 0.75;
    LayerFinding other;
    other.layer = LayerId::Architecture;
    other.severity = 1.0;
    CHECK(aggregate_layer_severity({a, b, other}, LayerId::Syntax) == 0.75);
    CHECK(aggregate_layer_severity({a, b}, LayerId::Syntax, Aggregation::Mean) == doctest::Approx(0.525));
    LayerFinding single;
    single.severity = 0.98;
    CHECK(aggregate_layer_severity({single}, LayerId::Syntax) == 0.98);
}

TEST_CASE("risk score") {
    auto m = [](double s, double d, double a) {
        return std::map<LayerId, double>{{LayerId::Syntax, s}, {LayerId::DesignPattern, d}, {LayerId::Architecture, a}};
    };
    CHECK(risk_score(m(0.75, 0.5, 0.25)) == doctest::Approx(0.5));
    CHECK(risk_score(m(0, 0, 0)) == 0.0);
    CHECK(risk_score(m(1, 1, 1)) == 1.0);
    CHECK(std::abs(risk_score(m(0.9, 0, 0.9)) - 0.6) < 1e-12);
    CHECK(risk_score(m(1, 0, 0), LayerWeights{2, 1, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(risk_score({{LayerId::Syntax, 1.0}}), Error);
    CHECK_THROWS_AS(risk_score(m(0, 0, 0), LayerWeights{0, 0, 0}), Error);
}

TEST_CASE("verification scenarios") {
    const auto slice = proxy_forward();
    VerifierOptions options;

    const auto silent = flag_layers({}, "[]");
    auto audit = verify_with_hits(slice, {}, silent, options);
    CHECK(audit.risk_score == 0.0);
    CHECK(audit.findings.empty());
    CHECK(audit.exchanges.size() == 3);
    CHECK(audit.errors.empty());

    const auto layer2 = flag_layers({2}, R"([{"title":"Missing access control","severity":0.6}])");
    audit = verify_with_hits(slice, {}, layer2, options);
    CHECK(std::abs(audit.risk_score - 0.2) < 1e-12);

    const auto proxy = flag_layers({1, 3}, kSwc112);
    audit = verify_with_hits(slice, {}, proxy, options);
    CHECK(std::abs(audit.risk_score - 0.6) < 1e-12);
    CHECK(audit.findings.size() == 2);
    CHECK(confirmed_swc_ids(audit) == std::set<std::string>{"SWC-112"});
    for (const auto& f : audit.findings) CHECK(f.layer != LayerId::DesignPattern);
}

TEST_CASE("layer failures degrade to zero severity") {
    const auto slice = proxy_forward();
    const CallbackLlmProvider flaky([](const Prompt& p) -> std::string {
        if (p.system.find("layer 2 of 3") != std::string::npos) throw Error(ErrorKind::ProviderUnavailable, "down");
        if (p.system.find("layer 3 of 3") != std::string::npos) return "I cannot help";
        return R"([{"swc_id":"SWC-112","title":"t"}])";
    });
    const auto audit = verify_with_hits(slice, {}, flaky, {});
    CHECK(audit.errors.size() == 2);
    CHECK(audit.layer_severity.at(LayerId::DesignPattern) == 0.0);
    CHECK(audit.layer_severity.at(LayerId::Architecture) == 0.0);
    CHECK(std::abs(audit.risk_score - 0.3) < 1e-12);
}

TEST_CASE("pipeline is deterministic and parallel output keeps order") {
    const auto unit = parse_source(fixture("test_token.sol"), "test_token.sol");
    const auto slices = build_corpus({unit}, {}, false);
    LocalEmbeddingProvider embedder(64);
    VectorStore kb(64);
    for (const auto& s : slices) kb.insert({entry_id_for(s), embedder.embed(s.assembled_text), s.assembled_text, s.metadata, 0});
    const auto llm = flag_layers({1}, R"([{"title":"Style","category":"Readability","severity":0.2}])");
    VerifierOptions options;
    options.threshold = {0.5};
    const auto serial = verify_functions(slices, kb, embedder, llm, options);
    options.parallelism = 4;
    const auto parallel = verify_functions(slices, kb, embedder, llm, options);
    REQUIRE(serial.size() == slices.size());
    for (std::size_t i = 0; i < slices.size(); ++i) {
        CHECK(serial[i].function_name == slices[i].main_function.name);
        CHECK(parallel[i].function_name == serial[i].function_name);
        CHECK(parallel[i].findings == serial[i].findings);
        CHECK(parallel[i].risk_score == serial[i].risk_score);
        REQUIRE(serial[i].retrieved.size() >= 1);
        CHECK(serial[i].retrieved[0].entry->entry_id == entry_id_for(slices[i]));
        CHECK(serial[i].exchanges[0].user_prompt == parallel[i].exchanges[0].user_prompt);
    }
}

TEST_CASE("retrieve applies top-k then the threshold") {
    VectorStore kb(2);
    kb.insert({"a", EmbeddingVector({1, 0}), "a", {}, 0});
    kb.insert({"b", EmbeddingVector({1, 1}), "b", {}, 0});
    kb.insert({"c", EmbeddingVector({0, 1}), "c", {}, 0});
    CHECK(retrieve(kb, EmbeddingVector({1, 0}), 10, {0.5}).size() == 2);
    CHECK(retrieve(kb, EmbeddingVector({1, 0}), 1, {0.5}).size() == 1);
    CHECK(retrieve(empty_kb(), EmbeddingVector(std::vector<double>(64, 1.0)), 10, {0.9}).empty());
}

TEST_CASE("scripted provider lookup order") {
    auto p = ScriptedLlmProvider::from_json_text(R"({
        "by_hash": {"HASH": "from-hash"},
        "by_sequence": ["first", {"k": 1}],
        "rules": [{"system_contains": "alpha", "user_contains": ["x", "y"], "response": "rule"}],
        "default": "fallback"})");
    CHECK(p.complete({"s", "u"}) == "first");
    CHECK(p.complete({"s", "u"}) == R"({"k":1})");
    CHECK(p.complete({"alpha", "xy"}) == "rule");
    CHECK(p.complete({"alpha", "x"}) == "fallback");
    const Prompt keyed{"sys", "user"};
    auto h = ScriptedLlmProvider::from_json_text(
        std::string(R"({"by_hash": {")") + prompt_hash(keyed) + R"(": "hashed"}})");
    CHECK(h.complete(keyed) == "hashed");
    CHECK(h.complete({"other", "prompt"}) == "[]");
    CHECK_THROWS_AS(ScriptedLlmProvider::from_json_text("[1,2]"), Error);
    CHECK_THROWS_AS(ScriptedLlmProvider::from_file("/nonexistent/script.json"), Error);
}

}  // TEST_SUITE
