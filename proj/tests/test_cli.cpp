#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nprk/cli.hpp"
#include "nprk/json_io.hpp"

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = nprk::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (char ch : s) n += ch == '\n';
    return n;
}

} // namespace

TEST_CASE("enumerate reproduces the two-partition counts") {
    const auto r = call({"enumerate", "--partitions", "2", "--max-order", "8", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("2,5,107,89,") != std::string::npos);
    CHECK(r.out.find("2,8,9498,9268,") != std::string::npos);
    CHECK(count_lines(r.out) == 9);
}

TEST_CASE("check reports the detected order and failing conditions") {
    const auto r = call({"check", "--tableau", "builtin:method1", "--max-order", "4"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("detected order: 3\n", 0) == 0);
    CHECK(r.out.find("†") != std::string::npos);

    const auto j = call({"check", "--tableau", "builtin:method2", "--format", "json"});
    REQUIRE(j.code == 0);
    const auto parsed = nprk::Json::parse(j.out);
    CHECK(parsed["detected_order"] == 2);
    for (const auto& f : parsed["failing"]) CHECK(f["class"] == "nonlinear");
}

TEST_CASE("conditions for three partitions") {
    const auto r = call({"conditions", "--partitions", "3", "--order", "3", "--format", "text"});
    REQUIRE(r.code == 0);
    CHECK(count_lines(r.out) == 15);
    CHECK(r.out.find("† Σ b_{ijk} a_{iabc} a_{juvw} = 1/3") != std::string::npos);

    const auto latex = call({"conditions", "--order", "2", "--format", "latex"});
    CHECK(latex.out.rfind("\\[ ", 0) == 0);

    const auto json = call({"conditions", "--order", "3", "--tableau", "builtin:method2", "--format", "json"});
    REQUIRE(json.code == 0);
    std::istringstream lines(json.out);
    std::string line;
    std::getline(lines, line);
    const auto j = nprk::Json::parse(line);
    std::vector<std::string> keys;
    for (const auto& item : j.items()) keys.push_back(item.key());
    CHECK(keys == std::vector<std::string>{"order", "tree", "weight", "target", "residual", "class"});
}

TEST_CASE("convert round trip through files") {
    const auto dir = std::filesystem::temp_directory_path() / "nprk-cli-test";
    std::filesystem::create_directories(dir);
    const auto pair_path = (dir / "pair.json").string();
    const auto lifted_path = (dir / "lifted.json").string();
    {
        std::ofstream f(pair_path);
        f << nprk::to_json(std::get<nprk::ArkPair>(nprk::builtin("lobatto3A3B"))).dump();
    }
    REQUIRE(call({"convert", "--tableau", pair_path, "--b-mode", "dense", "--out", lifted_path}).code == 0);
    const auto chk = call({"check", "--tableau", lifted_path});
    CHECK(chk.out.rfind("detected order: 2", 0) == 0);
    const auto back = call({"convert", "--tableau", lifted_path});
    REQUIRE(back.code == 0);
    CHECK(nprk::Json::parse(back.out).contains("a1"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("integrate writes CSV") {
    const auto r = call({"integrate", "--problem", "lv", "--alpha", "2", "--h", "0.25", "--t-end", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("t,y0,y1\n0,1,1\n", 0) == 0);
    CHECK(count_lines(r.out) == 6);
}

TEST_CASE("coupling scan and convergence outputs") {
    const auto scan = call({"coupling-scan", "--alpha", "0", "--alpha", "1", "--h", "0.01"});
    REQUIRE(scan.code == 0);
    CHECK(scan.out.rfind("alpha,h,estimate\n", 0) == 0);
    CHECK(count_lines(scan.out) == 3);

    const auto conv = call({"converge", "--alpha", "2", "--t-end", "0.2", "--h", "0.05", "--h", "0.025", "--h", "0.0125",
                            "--h", "0.005", "--format", "json"});
    REQUIRE(conv.code == 0);
    const auto j = nprk::Json::parse(conv.out);
    CHECK(j[0]["study"]["fitted"] == true);
}

TEST_CASE("witness") {
    const auto r = call({"witness", "--tree", "L:1,2,2;C:0,0,1", "--tableau", "builtin:method1", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nprk::Json::parse(r.out);
    CHECK(j["gamma"] == 3);
    CHECK(j["coefficient"].get<double>() == doctest::Approx(j["expected"].get<double>()).epsilon(1e-9));
}

TEST_CASE("output is deterministic") {
    const std::vector<std::string> args{"conditions", "--order", "4", "--tableau", "builtin:method1", "--format", "csv",
                                        "--threads", "3"};
    CHECK(call(args).out == call(args).out);
}

TEST_CASE("exit codes") {
    CHECK(call({}).code == 1);
    CHECK(call({"nonsense"}).code == 1);
    CHECK(call({"check", "--tableau", "builtin:nope"}).code == 1);
    CHECK(call({"check", "--tableau", "/nonexistent/t.json"}).code == 1);
    CHECK(call({"enumerate", "--partitions", "5", "--order", "9", "--max-trees", "1000"}).code == 3);
    CHECK(call({"conditions", "--order", "2", "--format", "yaml"}).code == 1);
    // Diverging stage solve.
    CHECK(call({"integrate", "--problem", "lv", "--alpha", "50", "--y0", "40", "--y0", "40", "--h", "5", "--t-end", "5"})
              .code == 2);
}

TEST_CASE("help describes every subcommand") {
    for (const auto* sub : {"enumerate", "conditions", "check", "convert", "integrate", "converge", "coupling-scan",
                            "witness"}) {
        const auto r = call({sub, "--help"});
        CHECK(r.code == 0);
        CHECK(r.out.find("--format") != std::string::npos);
    }
    const auto top = call({"--help"});
    CHECK(top.out.find("selftest") == std::string::npos);
}

TEST_CASE("selftest") {
    const auto r = call({"selftest", "--seed", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("ok") != std::string::npos);
}
