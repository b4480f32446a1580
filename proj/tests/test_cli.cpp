#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "usc/opcore.hpp"

using usc::cli::run;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string l; std::getline(in, l);)
        if (!l.empty() && l[0] != '#') lines.push_back(l);
    return lines;
}

}  // namespace

TEST_CASE("linear_grid") {
    const auto g = usc::cli::linear_grid(0.0, 1.0, 4);
    REQUIRE(g.size() == 5);
    CHECK(g[2] == doctest::Approx(0.5));
    CHECK(usc::cli::linear_grid(2.0, 2.0, 0).size() == 1);
    CHECK_THROWS_AS(usc::cli::linear_grid(0.0, 1.0, 0), usc::ConfigError);
}

TEST_CASE("parallel_map keeps order and rethrows") {
    const auto v = usc::cli::parallel_map(10, 3, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < 10; ++i) CHECK(v[i] == static_cast<int>(i * i));
    CHECK_THROWS_AS(usc::cli::parallel_map(4, 2,
                                           [](std::size_t i) -> int {
                                               if (i == 2) throw usc::NumericalError("boom");
                                               return 0;
                                           }),
                    usc::NumericalError);
}

TEST_CASE("spectrum") {
    const Result r = call({"spectrum", "--model", "xy", "--n", "3", "--lambda", "1.3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("# uscsim spectrum") != std::string::npos);
    const auto rows = data_lines(r.out);
    REQUIRE(rows.size() == 9);  // header + 8 levels
    CHECK(rows[0] == "index,energy,delta_from_ground,parity");

    const Result j = call({"spectrum", "--n", "2", "--lambda", "0.8", "--format", "json"});
    REQUIRE(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["rows"].size() == 4);
    CHECK(doc["footer"]["omega10"].get<double>() == doctest::Approx(std::sqrt(1.64) - 0.8));
}

TEST_CASE("sweep-lambda with and without perturbation") {
    const Result r = call({"sweep-lambda", "--n", "3", "--lambda-steps", "5"});
    CHECK(r.code == 0);
    const auto rows = data_lines(r.out);
    CHECK(rows.size() == 7);
    CHECK(rows[0].find("s_phi_z") != std::string::npos);
    const Result p = call({"sweep-lambda", "--n", "3", "--lambda-steps", "2", "--perturb", "0.01"});
    CHECK(p.code == 0);
    REQUIRE_FALSE(data_lines(p.out).empty());
    CHECK(data_lines(p.out)[0].find("abs_delta_s") != std::string::npos);
}

TEST_CASE("sweep-n") {
    const Result r = call({"sweep-n", "--n-min", "2", "--n-max", "5", "--format", "json"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["rows"].size() == 4);
    const Result big = call({"sweep-n", "--n-max", "13"});
    CHECK(big.code == 2);
    CHECK(big.err.find("N too large") != std::string::npos);
}

TEST_CASE("decay") {
    const Result r = call({"decay", "--n", "2", "--t-max", "20", "--samples", "21", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["rows"].size() == 21);
    CHECK(doc["footer"]["max_trace_error"].get<double>() <= 1e-8);
    const Result l = call({"decay", "--n", "2", "--t-max", "20", "--samples", "21", "--series", "logical", "--process", "joint"});
    CHECK(l.code == 0);
    REQUIRE_FALSE(data_lines(l.out).empty());
    CHECK(data_lines(l.out)[0] == "t,rho11,re_rho10,im_rho10,abs_rho10,trace");
    CHECK(call({"decay", "--process", "bogus"}).code == 2);
    const Result fail = call({"decay", "--n", "1", "--gamma", "1", "--gamma-phi", "1", "--dt", "5", "--t-max", "200", "--samples", "10"});
    CHECK(fail.code == 3);
    CHECK(fail.err.find("integrator failure") != std::string::npos);
}

TEST_CASE("gate") {
    const Result r = call({"gate", "--n", "1", "--lambda", "0", "--gates", "x,identity", "--format", "json"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j["fidelity"].get<double>() >= 0.999);
        ++count;
    }
    CHECK(count == 2);
    const Result c = call({"gate", "--z-curve", "--n", "3", "--omega-steps", "4"});
    CHECK(c.code == 0);
    CHECK(data_lines(c.out).size() == 6);
    CHECK(call({"gate", "--gates", "hadamard"}).code == 2);
}

TEST_CASE("circuit") {
    const Result r = call({"circuit", "--format", "json"});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["omega_q"].size() == 3);
    CHECK(j.contains("g_C_over_omega"));
    CHECK(call({"circuit", "--charge-cutoff", "2"}).code == 2);
}

TEST_CASE("errors and help") {
    CHECK(call({}).code == 2);
    CHECK(call({"frobnicate"}).code == 2);
    CHECK(call({"--help"}).code == 0);
    CHECK(call({"spectrum", "--lambda", "-1"}).code == 2);
    CHECK(call({"spectrum", "--lambda", "abc"}).code == 2);
}

TEST_CASE("determinism, threads and --out") {
    const std::vector<std::string> args{"sweep-lambda", "--n", "4", "--lambda-steps", "6"};
    const Result a = call(args), b = call(args);
    CHECK(a.out == b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "4"});
    // the recorded config differs by the thread count only
    auto strip = [](const std::string& s) {
        std::string o;
        std::istringstream in(s);
        for (std::string l; std::getline(in, l);)
            if (l.rfind("# threads", 0) != 0 && l.rfind("# footer", 0) != 0) o += l + "\n";
        return o;
    };
    CHECK(strip(call(threaded).out) == strip(a.out));

    const auto path = std::filesystem::temp_directory_path() / "uscsim_cli_test.csv";
    auto to_file = args;
    to_file.insert(to_file.end(), {"--out", path.string()});
    const Result f = call(to_file);
    CHECK(f.code == 0);
    CHECK(f.out.empty());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(strip(ss.str()) == strip(a.out));
    std::filesystem::remove(path);
}
