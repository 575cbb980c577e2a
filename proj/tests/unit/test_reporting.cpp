#include <doctest.h>

#include <solaudit/error.hpp>
#include <solaudit/reporting.hpp>
#include <solaudit/serialization.hpp>

#include <fstream>
#include <sstream>

using namespace solaudit;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(SOLAUDIT_FIXTURE_DIR) + "/" + name);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

struct Token {
    SourceUnit unit = parse_source(fixture("test_token.sol"), "test_token.sol");
    ContextSlice transfer = assemble_slice(unit, "transfer", {});
};

LayerFinding finding(std::optional<CodeLocation> loc, std::optional<std::string> swc = "SWC-101") {
    LayerFinding f;
    f.swc_id = std::move(swc);
    f.title = "Arithmetic issue";
    f.severity = 0.75;
    f.reason = "unchecked arithmetic";
    f.location = loc;
    return f;
}

FunctionAudit audit_with(std::vector<LayerFinding> findings, double risk) {
    FunctionAudit a;
    a.function_name = "transfer";
    a.start_line = 17;
    a.end_line = 23;
    a.findings = std::move(findings);
    a.risk_score = risk;
    a.layer_severity = {{LayerId::Syntax, risk}, {LayerId::DesignPattern, 0}, {LayerId::Architecture, 0}};
    return a;
}

ReportItem item(const std::string& id, double score) {
    ReportItem i;
    i.id = id;
    i.title = "t";
    i.type = "SWC-101";
    i.code_block = "x";
    i.location = {"f.sol", 1, 1};
    i.risk_score = score;
    i.reason = "r";
    i.suggestions = "s";
    return i;
}

}  // namespace

TEST_SUITE("reporting") {

TEST_CASE("function reports") {
    Token t;
    CHECK(render_function_report(audit_with({}, 0), t.transfer, t.unit.raw_lines).empty());

    const auto items = render_function_report(audit_with({finding(CodeLocation{19, 21})}, 0.4), t.transfer, t.unit.raw_lines);
    REQUIRE(items.size() == 1);
    const std::string expected = t.unit.raw_lines[18] + "\n" + t.unit.raw_lines[19] + "\n" + t.unit.raw_lines[20];
    CHECK(items[0].code_block == expected);
    CHECK(items[0].id == "TestToken.transfer.1");
    CHECK(items[0].type == "SWC-101");
    CHECK(items[0].location == ReportLocation{"test_token.sol", 19, 21});
    CHECK(items[0].risk_score == 0.4);
    CHECK_FALSE(items[0].suggestions.empty());

    const auto fallback = render_function_report(audit_with({finding(std::nullopt, std::nullopt)}, 0.4), t.transfer, t.unit.raw_lines);
    REQUIRE(fallback.size() == 1);
    CHECK(fallback[0].code_block == t.transfer.main_function.body_text);
    CHECK(fallback[0].type == "Code Quality");
    CHECK(fallback[0].location.start_line == 17);
    CHECK(fallback[0].location.end_line == 23);

    const auto out_of_range = render_function_report(audit_with({finding(CodeLocation{500, 501})}, 0.4), t.transfer, t.unit.raw_lines);
    CHECK(out_of_range[0].code_block == t.transfer.main_function.body_text);

    CHECK(function_key(t.transfer, true) == "TestToken.transfer@L17");
    CHECK(remediation_for(std::string("SWC-107")) != remediation_for(std::nullopt));
}

TEST_CASE("aggregation") {
    const auto report = aggregate_reports({{}, {item("C.f.1", 0.2)}, {item("C.g.1", 0.9), item("C.g.2", 0.9)}},
                                          {}, {"C", "c.sol", "2025-01-01T00:00:00Z"});
    REQUIRE(report.items.size() == 3);
    CHECK(report.items[0].id == "C.g.1");
    CHECK(report.items[1].id == "C.g.2");
    CHECK(report.items[2].id == "C.f.1");
    CHECK(report.max_risk == 0.9);

    const auto empty = aggregate_reports({}, {}, {"C", "c.sol", "t"});
    CHECK(empty.items.empty());
    CHECK(empty.max_risk == 0.0);
    const auto j = Json::parse(emit_json(empty));
    CHECK(j["items"].is_array());
    CHECK(j["items"].empty());
}

TEST_CASE("canonical JSON") {
    const auto report = aggregate_reports({{item("C.f.1", 0.2), item("C.f.2", 0.5)}}, {}, {"C", "c.sol", "t"});
    const auto text = emit_json(report);
    CHECK(text.back() == '\n');
    const auto back = parse_report(text);
    CHECK(back == report);
    CHECK(emit_json(back) == text);

    const auto j = Json::parse(text);
    std::vector<std::string> keys;
    for (const auto& [k, v] : j["items"][0].items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"ID", "Title", "Type", "CodeBlock", "Location", "RiskScore", "Reason", "Suggestions"});
    CHECK_THROWS_AS(parse_report("{\"items\": 3}"), Error);
    CHECK_THROWS_AS(parse_report("nope"), Error);
}

TEST_CASE("timestamps") {
    CHECK(format_utc_timestamp(0) == "1970-01-01T00:00:00Z");
    CHECK(format_utc_timestamp(1700000000) == "2023-11-14T22:13:20Z");
}

}  // TEST_SUITE
