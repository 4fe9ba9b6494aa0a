#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Drives the built CLI binary (path in the SBUNDLE_CLI environment variable)
// through its documented exit codes, CSV schemas and golden outputs.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace {

struct RunResult {
    int exit_code;
    std::string out;
};

std::string cli_path() {
    const char* path = std::getenv("SBUNDLE_CLI");
    REQUIRE_MESSAGE(path != nullptr, "SBUNDLE_CLI must point at the built binary");
    return path;
}

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

int column(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

}  // namespace

TEST_CASE("eval sweeps the line model with scores") {
    const auto r = run("eval --model line --grid 0.05:0.45:9 --with-score");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 10);
    const auto header = split(rows[0]);
    const int status = column(header, "status");
    REQUIRE(status >= 0);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(split(rows[i])[status] == "ok");

    // the t = 0.25 row is exact in binary
    CHECK(rows[5] == "0.25,0.25,0.25,0.5,1,1,-2,4,4,-4,16,111,ok");
}

TEST_CASE("eval reports boundary contacts as row status") {
    const auto violation = run("eval --model line --grid 0.5:0.5:1 --with-score");
    CHECK(violation.exit_code == 0);
    const auto vrows = lines(violation.out);
    REQUIRE(vrows.size() == 2);
    const auto vheader = split(vrows[0]);
    CHECK(split(vrows[1])[column(vheader, "status")] == "abs_continuity_violation");

    const auto tangential = run("eval --model entropy3 --grid 0.5:0.5:1 --with-score");
    CHECK(tangential.exit_code == 0);
    const auto trows = lines(tangential.out);
    REQUIRE(trows.size() == 2);
    const auto theader = split(trows[0]);
    const auto tdata = split(trows[1]);
    CHECK(tdata[column(theader, "status")] == "ok");
    CHECK(tdata[column(theader, "s_2")] == "0");
    CHECK(tdata[column(theader, "determined_mask")] == "101");
}

TEST_CASE("score is eval with scores implied") {
    const auto a = run("score --model line --grid 0.1:0.4:4");
    const auto b = run("eval --model line --grid 0.1:0.4:4 --with-score");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("gibbs figure hits the border point at beta = 0") {
    const auto r = run("gibbs --beta -3:3:601");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 602);
    CHECK(rows[1 + 300] == "0,0.5,0.5,0");
    // endpoints included exactly
    CHECK(split(rows[1])[0] == "-3");
    CHECK(split(rows[601])[0] == "3");
}

TEST_CASE("gibbs accepts a params block") {
    const auto r = run("gibbs --beta 0:0:1 --params '{\"U\":[0,1],\"V\":[0,1]}'");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1] == "0,1,0");  // uniform on {U=0} = cell 1
}

TEST_CASE("entropy production compensates the singularity on a grid containing 1/2") {
    const auto r = run("entropy --production --grid 0.11:0.79:69");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 70);
    double best_gap = 1e9, best_value = 1e9;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split(rows[i]);
        const double t = std::stod(cells[0]);
        if (std::abs(t - 0.5) < best_gap) {
            best_gap = std::abs(t - 0.5);
            best_value = std::stod(cells[1]);
        }
    }
    CHECK(std::abs(best_value) < 1e-6);
}

TEST_CASE("entropy heat map covers the simplex") {
    const auto r = run("entropy --heatmap --resolution 20");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 1 + 20 * 20);
    const double log3 = std::log(3.0);
    double max_h = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split(rows[i]);
        const double w1 = std::stod(cells[0]), w2 = std::stod(cells[1]), w3 = std::stod(cells[2]);
        const double h = std::stod(cells[3]);
        CHECK(std::abs(w1 + w2 + w3 - 1.0) <= 1e-12);
        CHECK(h >= -1e-12);
        CHECK(h <= log3 + 1e-12);
        max_h = std::max(max_h, h);
    }
    CHECK(max_h > log3 - 0.05);
}

TEST_CASE("geodesic sweep reports psi = KL") {
    const auto r = run(
        "geodesic --base '{\"labels\":[\"1\",\"2\",\"3\"],\"weights\":[0.5,0.5,0]}' "
        "--direction '[1,-1,0]' --grid -2:2:9");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 10);
    const auto header = split(rows[0]);
    const int klcheck = column(header, "kl_check");
    const int w3 = column(header, "w_3");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = split(rows[i]);
        CHECK(std::stod(cells[klcheck]) <= 1e-10);
        CHECK(cells[w3] == "0");  // support preserved
    }
}

TEST_CASE("flow emits the trajectory schema and converges") {
    const auto r = run(
        "flow --functional entropy --p0 '{\"labels\":[\"1\",\"2\",\"3\"],"
        "\"weights\":[0.7,0.3,0]}' --step 0.5 --steps 100");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() >= 3);
    CHECK(split(rows[0]) ==
          std::vector<std::string>{"k", "t", "w_1", "w_2", "w_3", "G_value", "grad_norm"});
    const auto last = split(rows.back());
    CHECK(std::abs(std::stod(last[2]) - 0.5) <= 1e-6);
    CHECK(std::abs(std::stod(last[3]) - 0.5) <= 1e-6);
    CHECK(last[4] == "0");
    CHECK(std::stod(last[6]) < 1e-8);
}

TEST_CASE("algebra derives tangent systems and score relations") {
    {
        std::ofstream model("cli_test_indep.txt");
        model << "# independence\n";
        model << "p11*p22 - p12*p21\n";
    }
    const auto r = run("algebra --model-file cli_test_indep.txt --labels 11,12,21,22");
    CHECK(r.exit_code == 0);
    const std::string expected =
        "# model\n"
        "p11*p22 - p12*p21\n"
        "# tangent system\n"
        "p11*p22 - p12*p21\n"
        "p11*p22*s11 + p11*p22*s22 - p12*p21*s12 - p12*p21*s21\n"
        "p11 + p12 + p21 + p22 - 1\n"
        "p11*s11 + p12*s12 + p21*s21 + p22*s22\n"
        "# binomial score relations\n"
        "p11*p22 - p12*p21  =>  s11 - s12 - s21 + s22 = 0\n";
    CHECK(r.out == expected);

    {
        std::ofstream model("cli_test_line.txt");
        model << "p1 - p2\n";
        model << "p3 + 2*p1 - 1\n";
    }
    const auto line = run("algebra --model-file cli_test_line.txt --labels 1,2,3");
    CHECK(line.exit_code == 0);
    CHECK(line.out.find("p1*s1 - p2*s2") != std::string::npos);
    CHECK(line.out.find("2*p1*s1 + p3*s3") != std::string::npos);
}

TEST_CASE("sampled tables are evaluated at their own nodes") {
    {
        std::ofstream table("cli_test_table.csv");
        table << "t,w_1,w_2,w_3\n";
        for (int i = 0; i <= 8; ++i) {
            const double t = 0.1 + i * 0.04;
            table << t << "," << t << "," << t << "," << 1 - 2 * t << "\n";
        }
    }
    const auto r = run("eval --model cli_test_table.csv --with-score");
    CHECK(r.exit_code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 10);
    const auto header = split(rows[0]);
    const int status = column(header, "status");
    const int s1 = column(header, "s_1");
    CHECK(split(rows[1])[status] == "out_of_domain");
    CHECK(split(rows[9])[status] == "out_of_domain");
    for (std::size_t i = 2; i < 9; ++i) {
        const auto cells = split(rows[i]);
        CHECK(cells[status] == "ok");
        // fd on the sampled line model reproduces 1/t
        const double t = std::stod(cells[0]);
        CHECK(std::abs(std::stod(cells[s1]) - 1.0 / t) <= 1e-9);
    }
}

TEST_CASE("outputs are bit-stable across runs") {
    const std::string cmd = "eval --model marghomo --grid 0.1:0.9:17 --with-score";
    const auto a = run(cmd);
    const auto b = run(cmd);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);

    const auto v1 = run("verify --only transport-laws --seed 7");
    const auto v2 = run("verify --only transport-laws --seed 7");
    CHECK(v1.exit_code == 0);
    // strip the timing suffix before comparing
    const auto strip = [](std::string s) {
        const auto pos = s.rfind(" [");
        return pos == std::string::npos ? s : s.substr(0, pos);
    };
    CHECK(strip(v1.out) == strip(v2.out));
}

TEST_CASE("json output format") {
    const auto r = run("eval --model line --grid 0.25:0.25:1 --format json");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"w_3\": \"0.5\"") != std::string::npos);
}

TEST_CASE("failure paths use distinct exit codes") {
    CHECK(run("eval --model nope --grid 0:1:3").exit_code == 3);
    CHECK(run("eval --model line --grid bad").exit_code == 2);
    CHECK(run("eval --model line --grid 0:1:1").exit_code == 2);  // n=1 needs min=max
    CHECK(run("eval --model line").exit_code == 2);               // missing grid
    CHECK(run("eval").exit_code == 2);                            // missing model
    CHECK(run("eval --model line --grid 0:0.5:5 -o /nonexistent-dir/x.csv").exit_code == 4);
    CHECK(run("verify --only bogus").exit_code == 2);
    CHECK(run("algebra --model-file missing.txt --labels 1,2").exit_code == 3);
    CHECK(run("flow --functional nope --p0 '{\"labels\":[\"1\"],\"weights\":[1]}'").exit_code == 2);
    CHECK(run("nonsense").exit_code == 2);
}

TEST_CASE("environment tolerance override") {
    // weights sum to 1 + 5e-9: rejected by default, accepted with a loose tol
    const std::string geodesic_args =
        "geodesic --base '{\"labels\":[\"1\",\"2\"],\"weights\":[0.5,0.500000005]}' "
        "--direction '[1,-1]' --grid 0:0:1";
    CHECK(run(geodesic_args).exit_code == 2);
    CHECK(run(geodesic_args, "SIMPLEX_BUNDLE_TOL=1e-6").exit_code == 0);
    CHECK(run(geodesic_args, "SIMPLEX_BUNDLE_TOL=junk").exit_code == 2);
}
