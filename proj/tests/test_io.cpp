#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "pdmwit/scenario.hpp"

using namespace pdmwit;

namespace {

std::string error_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const ConfigError &e) {
        return e.what();
    }
    return "";
}

Json parse(const std::string &s) { return parse_config_text(s); }

} // namespace

TEST(FormatDouble, RoundTripsAndNormalizes) {
    EXPECT_EQ(format_double(-0.0), "0");
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "null");
    EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "null");
    for (double x : {1.0 / 3.0, -2.5e-300, 6.02214076e23, std::sqrt(2.0) - 1.0}) {
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
}

TEST(JsonText, MatrixRowsOnOneLine) {
    Json j;
    j["m"] = matrix_json(identity(2));
    j["x"] = -0.0;
    const std::string text = to_json_text(j);
    EXPECT_EQ(text, "{\n  \"m\": [\n    [[1, 0], [0, 0]],\n    [[0, 0], [1, 0]]\n  ],\n  \"x\": 0\n}\n");
    // The writer is a pure function of the value.
    EXPECT_EQ(text, to_json_text(parse(text)));
}

TEST(ParseConfig, SyntaxErrorsReportLineAndColumn) {
    const std::string msg = error_of([] { (void)parse("{\n  \"a\": 1,\n  \"b\": ]\n}"); });
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("JSON syntax error"), std::string::npos);
}

TEST(Fields, UnknownAndMissing) {
    const Json obj = parse(R"({"a": 1, "typo": 2})");
    Fields f(obj, "top");
    EXPECT_EQ(f.required("a"), 1);
    EXPECT_EQ(f.optional("b"), nullptr);
    EXPECT_EQ(error_of([&] { f.finish(); }), "top.typo: unknown field");
    Fields g(obj, "");
    EXPECT_EQ(error_of([&] { (void)g.required("z"); }), "z: required field is missing");
    EXPECT_THROW(Fields(parse("[1]"), "x"), ConfigError);
}

TEST(ParseState, Literals) {
    EXPECT_LE(max_abs_diff(parse_state(Json("one"), "s").matrix(), unit(2, 1, 1)), 0.0);
    const auto plus = parse_state(Json("plus"), "s");
    EXPECT_NEAR(plus.matrix()(0, 1).real(), 0.5, 1e-15);
    const auto minus = parse_state(Json("minus"), "s");
    EXPECT_NEAR(minus.matrix()(0, 1).real(), -0.5, 1e-15);
    EXPECT_LE(max_abs_diff(parse_state(Json("basis(2)"), "s", 3).matrix(), unit(3, 2, 2)), 0.0);
    EXPECT_EQ(parse_state(Json("maximally_mixed"), "s", 4).dim(), 4);
    const auto d = parse_state(parse(R"({"name": "diagonal", "probs": [0.25, 0.75]})"), "s");
    EXPECT_DOUBLE_EQ(d.matrix()(1, 1).real(), 0.75);
    const auto p = parse_state(parse(R"({"name": "pure", "vector": [[0, 2], 0]})"), "s");
    EXPECT_NEAR(p.matrix()(0, 0).real(), 1.0, 1e-15);
    const auto b = parse_state(parse(R"({"name": "basis", "index": 1, "dim": 3})"), "s");
    EXPECT_EQ(b.dim(), 3);

    EXPECT_EQ(error_of([] { (void)parse_state(Json("basis(2)"), "state"); }), "state: basis index out of range");
    EXPECT_EQ(error_of([] { (void)parse_state(Json("basis(x)"), "state", 3); }),
              "state: cannot read numeric argument 'x'");
    EXPECT_EQ(error_of([] { (void)parse_state(parse(R"({"name": "basis", "index": 0, "extra": 1})"), "state"); }),
              "state.extra: unknown field");
    // Validation failures from the library are reported at the field.
    const std::string bad = error_of([] { (void)parse_state(parse("[[0.5, 0], [0, 0.4]]"), "state"); });
    EXPECT_EQ(bad.rfind("state: ", 0), 0U) << bad;
    const std::string neg = error_of([] {
        (void)parse_state(parse(R"({"name": "diagonal", "probs": [1.5, -0.5]})"), "state");
    });
    EXPECT_EQ(neg.rfind("state.probs: ", 0), 0U) << neg;
}

TEST(ParseChannel, Literals) {
    const Matrix rho = unit(2, 0, 0);
    EXPECT_TRUE(channels_equal(parse_channel(Json("identity"), "c"), channels::identity(2)));
    EXPECT_TRUE(channels_equal(parse_channel(Json("dephase"), "c", 3), channels::dephase(3)));
    EXPECT_TRUE(channels_equal(parse_channel(Json("amplitude_damping(0.3)"), "c"),
                               channels::amplitude_damping(0.3)));
    EXPECT_TRUE(channels_equal(parse_channel(Json("depolarizing(0.2)"), "c"), channels::depolarizing(0.2, 2)));

    // compose lists channels right to left: the last one acts first.
    const auto h = parse(R"({"name": "unitary", "matrix": [[0.7071067811865476, 0.7071067811865476],
                                                           [0.7071067811865476, -0.7071067811865476]]})");
    Json comp;
    comp["name"] = "compose";
    comp["channels"] = Json::array({"dephase", h});
    const Matrix out = apply_channel(parse_channel(comp, "c"), rho);
    EXPECT_LE(max_abs_diff(out, identity(2) * 0.5), 1e-12);

    const auto st = parse_channel(parse(R"({"name": "stochastic", "a": [[0.9, 0.2], [0.1, 0.8]]})"), "c");
    EXPECT_NEAR(apply_channel(st, rho)(1, 1).real(), 0.1, 1e-12);

    const std::string msg = error_of([] {
        (void)parse_channel(parse(R"({"name": "kraus", "ops": [[[1, 0], [0, 1]], [[1, 0], [0, 0]]]})"), "channel");
    });
    EXPECT_EQ(msg.rfind("channel.ops: ", 0), 0U) << msg;
    EXPECT_EQ(error_of([] { (void)parse_channel(Json("teleport"), "channel"); }),
              "channel: unknown channel 'teleport'");
    EXPECT_EQ(error_of([] { (void)parse_channel(parse(R"({"name": "identity", "gamma": 1})"), "channel"); }),
              "channel.gamma: unknown field");
    EXPECT_EQ(error_of([] {
                  (void)parse_channel(parse(R"({"name": "stochastic", "a": [[1, [0, 1]], [0, 0]]})"), "channel");
              }),
              "channel.a: stochastic matrix must be real");
}

TEST(ParseDichotomic, NamedAndMatrix) {
    EXPECT_LE(max_abs_diff(parse_dichotomic(Json("Y"), "q").matrix(), PauliString{"Y"}.matrix()), 0.0);
    EXPECT_NO_THROW((void)parse_dichotomic(parse("[[1, 0, 0], [0, -1, 0], [0, 0, 1]]"), "q"));
    EXPECT_EQ(error_of([] { (void)parse_dichotomic(Json("W"), "q"); }), "q: unknown observable 'W'");
    EXPECT_THROW((void)parse_dichotomic(parse("[[1, 0], [0, 0]]"), "q"), ConfigError);
}

TEST(ParseBasis, Values) {
    EXPECT_FALSE(parse_basis(nullptr, "basis").has_value());
    const Json def("default");
    EXPECT_FALSE(parse_basis(&def, "basis").has_value());
    const Json lt("light_touch");
    EXPECT_EQ(parse_basis(&lt, "basis"), BasisKind::light_touch);
    const Json bad("gell_mann");
    EXPECT_THROW((void)parse_basis(&bad, "basis"), ConfigError);
}

TEST(ParseScenario, VersionKindAndUnknownFields) {
    EXPECT_NO_THROW((void)parse_scenario(parse(R"({"version": 1, "kind": "pdm", "state": "zero",
                                                   "channel": "identity"})")));
    EXPECT_EQ(error_of([] { (void)parse_scenario(parse(R"({"kind": "pdm"})")); }),
              "version: required field is missing");
    EXPECT_THROW((void)parse_scenario(parse(R"({"version": 2, "kind": "pdm", "state": "zero",
                                               "channel": "identity"})")),
                 ConfigError);
    EXPECT_EQ(error_of([] {
                  (void)parse_scenario(parse(R"({"version": 1, "kind": "pdm", "state": "zero",
                                                 "channel": "identity", "shots": 10})"));
              }),
              "shots: unknown field");
    EXPECT_THROW((void)parse_scenario(parse(R"({"version": 1, "kind": "teleport"})")), ConfigError);
    EXPECT_THROW((void)parse_scenario(parse(R"({"version": 1, "kind": "pdm", "state": "zero",
                                               "channel": "identity", "p_values": [0.5]})")),
                 ConfigError);
}

TEST(WriteFileAtomic, ReplacesWithoutLeavingTemp) {
    const auto dir = std::filesystem::temp_directory_path() / "pdmwit_io_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.json";
    write_file_atomic(path, "first\n");
    write_file_atomic(path, "second\n");
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    EXPECT_EQ(s.str(), "second\n");
    EXPECT_FALSE(std::filesystem::exists(dir / "out.json.tmp"));
    std::filesystem::remove_all(dir);
}

TEST(CorrelatorCsv, HeaderAndGridOrder) {
    const Pdm r = pdm_closed_form(DensityMatrix::basis_state(2, 0), channels::identity(2));
    const std::string csv = correlator_csv(exact_correlators(r));
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "label1,label2,value,shots");
    std::getline(lines, line);
    EXPECT_EQ(line, "I,I,1,0");
    std::getline(lines, line);
    EXPECT_EQ(line.rfind("I,X,", 0), 0U);
    int rows = 0;
    for (std::istringstream all(csv); std::getline(all, line);) {
        ++rows;
    }
    EXPECT_EQ(rows, 17);
    EXPECT_EQ(correlator_csv(exact_correlators(r), true).substr(0, 33), "label1,label2,value,shots,stderr\n");
}
