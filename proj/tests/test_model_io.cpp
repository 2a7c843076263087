#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "brw/builtin_models.hpp"
#include "brw/model_io.hpp"

using namespace brw;

namespace {

std::string write_temp(const std::string& content) {
    static int counter = 0;
    std::string path = "brw_io_test_" + std::to_string(counter++) + ".model";
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("parses decimals, rationals and comments") {
    std::istringstream in(
        "# demo\n"
        "label demo\n"
        "mode subcritical\n"
        "jump\n"
        "  -1 0.5\n"
        "   1 1/2\n"
        "offspring\n"
        "  0 1/5\n"
        "  1 0.8   # trailing comment\n");
    const ModelSpec m = load_model(in);
    CHECK(m.label == "demo");
    CHECK(m.mode == Mode::subcritical);
    CHECK(m.jump.prob_at(1) == 0.5);
    CHECK(m.offspring.p(1) == 0.8);
    CHECK(m.offspring.mean() == doctest::Approx(0.8));
}

TEST_CASE("parse errors carry line and column") {
    std::istringstream bad("label x\nmode subcritical\njump\n  -1 half\n");
    try {
        load_model(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 4);
        CHECK(std::string(e.what()).find("half") != std::string::npos);
    }
    std::istringstream stray("3 0.5\n");
    CHECK_THROWS_AS(load_model(stray), ParseError);
    CHECK_THROWS_AS(parse_probability("1/0", 1, 1), ParseError);
}

TEST_CASE("validate reports all issues at once") {
    const std::string path = write_temp(
        "label broken\n"
        "mode subcritical\n"
        "jump\n"
        "  -1 0.4\n"
        "   1 0.5\n"
        "offspring\n"
        "  0 0.6\n"
        "  1 0.39\n");
    const auto issues = validate_model_file(path);
    // jump sum, jump mean, offspring sum
    CHECK(issues.size() >= 3);
    bool mentions_mean = false, mentions_sum = false;
    for (const auto& i : issues) {
        if (i.find("mean") != std::string::npos) mentions_mean = true;
        if (i.find("sum") != std::string::npos) mentions_sum = true;
    }
    CHECK(mentions_mean);
    CHECK(mentions_sum);
    std::remove(path.c_str());
}

TEST_CASE("missing sections are reported") {
    const std::string path = write_temp("label x\njump\n 1 0.5\n -1 0.5\n");
    const auto issues = validate_model_file(path);
    CHECK(issues.size() >= 2);  // missing offspring, missing mode
    std::remove(path.c_str());
}

TEST_CASE("write then load round-trips") {
    const ModelSpec m = builtin_model("r2-geom-m07");
    const std::string path = "brw_io_roundtrip.model";
    write_model_file(m, path);
    const ModelSpec back = load_model_file(path);
    CHECK(back.label == m.label);
    CHECK(back.jump.entries().size() == m.jump.entries().size());
    for (const auto& e : m.jump.entries()) CHECK(back.jump.prob_at(e.offset) == e.prob);
    CHECK(back.offspring.probabilities() == m.offspring.probabilities());
    std::remove(path.c_str());
}

TEST_CASE("shipped model files match the builtins bit for bit") {
    for (const auto& name : builtin_model_names()) {
        const ModelSpec file =
            load_model_file(std::string(BRW_SOURCE_DIR) + "/data/models/" + name + ".model");
        const ModelSpec mem = builtin_model(name);
        REQUIRE(file.jump.entries().size() == mem.jump.entries().size());
        for (const auto& e : mem.jump.entries()) CHECK(file.jump.prob_at(e.offset) == e.prob);
        REQUIRE(file.offspring.probabilities().size() == mem.offspring.probabilities().size());
        for (std::size_t k = 0; k < mem.offspring.probabilities().size(); ++k)
            CHECK(file.offspring.p(static_cast<int>(k)) == mem.offspring.p(static_cast<int>(k)));
        CHECK(file.mode == mem.mode);
        CHECK(file.label == mem.label);
    }
}

TEST_CASE("validate passes every shipped model") {
    for (const auto& name : builtin_model_names()) {
        const auto issues =
            validate_model_file(std::string(BRW_SOURCE_DIR) + "/data/models/" + name + ".model");
        CHECK(issues.empty());
    }
}
