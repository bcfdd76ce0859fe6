// End-to-end CLI tests: subcommand grammar, report schema, exit codes.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#ifndef IKERN_CLI_PATH
#error "IKERN_CLI_PATH must point at the CLI binary"
#endif

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct CliResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch_dir() {
    const auto dir = fs::temp_directory_path() / "ikern_cli_test";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args) {
    const auto dir = scratch_dir();
    const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
    const std::string cmd = std::string(IKERN_CLI_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = (raw == -1) ? -1 : WEXITSTATUS(raw);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const auto p = scratch_dir() / name;
    std::ofstream out(p);
    out << text;
    return p;
}

fs::path coupled_csv() {
    std::ostringstream os;
    os << "x,y\n";
    for (int i = 0; i < 20; ++i) {
        const double v = 0.25 * i;
        os << v << "," << v << "\n";
    }
    return write_file("coupled.csv", os.str());
}

fs::path product_kernel_json(int n) {
    ordered_json parts = ordered_json::array();
    for (int i = 0; i < n; ++i) parts.push_back({{"type", "exp"}, {"rate", 1.0}});
    ordered_json j{{"family", "product"}, {"parts", parts}};
    return write_file("kernel_product" + std::to_string(n) + ".json", j.dump());
}

} // namespace

// ==== grammar and exit codes ===============================================

TEST_CASE("no subcommand exits 2, help exits 0", "[cli]") {
    REQUIRE(run_cli("").exit_code == 2);
    const auto help = run_cli("--help");
    REQUIRE(help.exit_code == 0);
    REQUIRE(help.out.find("interaction") != std::string::npos);
    REQUIRE(run_cli("interaction --help").exit_code == 0);
    REQUIRE(run_cli("bogus-subcommand").exit_code == 2);
}

// ==== partitions ===========================================================

TEST_CASE("partitions emits one JSON object per partition", "[cli]") {
    const auto r = run_cli("partitions --n 3");
    REQUIRE(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    std::vector<ordered_json> rows;
    while (std::getline(lines, line))
        if (!line.empty()) rows.push_back(ordered_json::parse(line));
    REQUIRE(rows.size() == 5);
    REQUIRE(rows.front()["index"] == 0);
    REQUIRE(rows.front()["rgs"] == ordered_json::array({0, 0, 0}));
    REQUIRE(rows.back()["rgs"] == ordered_json::array({0, 1, 2}));
    REQUIRE(rows.back()["blocks"].size() == 3);
}

TEST_CASE("partitions rejects out-of-range n", "[cli]") {
    REQUIRE(run_cli("partitions --n 0").exit_code == 2);
    REQUIRE(run_cli("partitions --n 13").exit_code == 2);
}

// ==== interaction ==========================================================

TEST_CASE("interaction report schema and worked statistic", "[cli]") {
    const auto csv = write_file("pair.csv", "x,y\n0,0\n1,1\n0,0\n1,1\n0,0\n1,1\n");
    const auto kernel = product_kernel_json(2);
    const auto r = run_cli("interaction --input " + csv.string() + " --groups 1,1 --order 2 --kernel " +
                           kernel.string());
    REQUIRE(r.exit_code == 0);
    const auto j = ordered_json::parse(r.out);

    const std::vector<std::string> keys{"statistic", "p_value", "order",  "mode",
                                        "kernel",    "seed",    "version"};
    REQUIRE(j.size() == keys.size());
    std::size_t at = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++at) REQUIRE(it.key() == keys[at]);

    // Empirical law uniform on {(0,0),(1,1)}: Lambda_2 = (1/4) sign pattern,
    // energy (1 - e^{-1})^2 / 4.
    const double q = 1.0 - std::exp(-1.0);
    REQUIRE(j["statistic"].get<double>() == Catch::Approx(q * q / 4.0).epsilon(1e-10));
    REQUIRE(j["p_value"].is_null());
    REQUIRE(j["order"] == 2);
    REQUIRE(j["mode"] == "lancaster");
    REQUIRE(j["kernel"]["family"] == "product");
    REQUIRE(j["seed"].is_null());
    REQUIRE(j["version"] == "0.1.0");
}

TEST_CASE("interaction permutation runs are reproducible byte for byte", "[cli]") {
    const auto csv = coupled_csv();
    const auto kernel = product_kernel_json(2);
    const auto out1 = scratch_dir() / "rep1.json", out2 = scratch_dir() / "rep2.json";
    const std::string base = "interaction --input " + csv.string() +
                             " --groups 1,1 --order 2 --kernel " + kernel.string() +
                             " --permutations 99 --seed 31 --out ";
    REQUIRE(run_cli(base + out1.string()).exit_code == 0);
    REQUIRE(run_cli(base + out2.string()).exit_code == 0);
    const auto text1 = slurp(out1);
    REQUIRE(text1 == slurp(out2));
    const auto j = ordered_json::parse(text1);
    REQUIRE(j["seed"] == 31);
    REQUIRE(j["p_value"].is_number());
    REQUIRE(j["p_value"].get<double>() <= 0.2); // strongly coupled columns
}

TEST_CASE("interaction streitberg mode at k = n", "[cli]") {
    const auto csv = write_file("pair2.csv", "x,y\n0,0\n1,1\n0,1\n1,0\n0,0\n1,1\n");
    const auto kernel = product_kernel_json(2);
    const auto r = run_cli("interaction --input " + csv.string() +
                           " --groups 1,1 --order 2 --mode streitberg --kernel " + kernel.string());
    REQUIRE(r.exit_code == 0);
    REQUIRE(ordered_json::parse(r.out)["mode"] == "streitberg");
}

TEST_CASE("interaction input and configuration failures exit 2", "[cli]") {
    const auto kernel = product_kernel_json(2);
    const auto csv = write_file("ok.csv", "x,y\n0,0\n1,1\n");

    REQUIRE(run_cli("interaction --input /nonexistent.csv --groups 1,1 --order 2 --kernel " +
                    kernel.string())
                .exit_code == 2);

    const auto shortrow = write_file("short.csv", "x,y\n0,0\n1\n");
    const auto r = run_cli("interaction --input " + shortrow.string() +
                           " --groups 1,1 --order 2 --kernel " + kernel.string());
    REQUIRE(r.exit_code == 2);
    REQUIRE(r.err.find("line 3") != std::string::npos);

    const auto badnum = write_file("badnum.csv", "x,y\n0,zero\n");
    REQUIRE(run_cli("interaction --input " + badnum.string() + " --groups 1,1 --order 2 --kernel " +
                    kernel.string())
                .exit_code == 2);

    const auto badkernel = write_file("bad.json", "{\"family\":");
    REQUIRE(run_cli("interaction --input " + csv.string() + " --groups 1,1 --order 2 --kernel " +
                    badkernel.string())
                .exit_code == 2);

    // Order disagreeing with the kernel's own order is a configuration error.
    REQUIRE(run_cli("interaction --input " + csv.string() + " --groups 1,1 --order 1 --kernel " +
                    kernel.string())
                .exit_code == 2);
    // Streitberg at k != n likewise: an order-1 kernel keeps the order check
    // happy, so the k = n rule is what trips.
    const auto orderk1 = write_file(
        "orderk1.json",
        R"({"family":"orderk","n":2,"k":1,"eta":[{"r":[1.0,1.0],"w":1.0}]})");
    REQUIRE(run_cli("interaction --input " + csv.string() +
                    " --groups 1,1 --order 1 --mode streitberg --kernel " + orderk1.string())
                .exit_code == 2);
    REQUIRE(run_cli("interaction --input " + csv.string() + " --groups 1,1 --order 2 --mode bogus " +
                    "--kernel " + kernel.string())
                .exit_code == 2);
}

TEST_CASE("interaction accepts headerless CSV via --no-header", "[cli]") {
    const auto csv = write_file("nohdr.csv", "0,0\n1,1\n0,0\n1,1\n");
    const auto kernel = product_kernel_json(2);
    const auto r = run_cli("interaction --input " + csv.string() +
                           " --groups 1,1 --order 2 --kernel " + kernel.string() + " --no-header");
    REQUIRE(r.exit_code == 0);
    const double q = 1.0 - std::exp(-1.0);
    REQUIRE(ordered_json::parse(r.out)["statistic"].get<double>() ==
            Catch::Approx(q * q / 4.0).epsilon(1e-10));
}

// ==== verify-kernel ========================================================

TEST_CASE("verify-kernel passes a sound kernel at its own order", "[cli]") {
    const auto kernel = product_kernel_json(2);
    const auto r = run_cli("verify-kernel --kernel " + kernel.string() +
                           " --order 2 --trials 40 --seed 3");
    REQUIRE(r.exit_code == 0);
    const auto j = ordered_json::parse(r.out);
    REQUIRE(j["passed"] == true);
    bool saw_pdi = false, saw_cnd = false;
    for (const auto& rep : j["reports"]) {
        if (rep["name"] == "pdi_random") saw_pdi = true;
        const auto name = rep["name"].get<std::string>();
        if (name.rfind("cnd:", 0) == 0) saw_cnd = true;
        REQUIRE(rep["passed"] == true);
    }
    REQUIRE(saw_pdi);
    REQUIRE(saw_cnd);
}

TEST_CASE("verify-kernel exits 3 when probed past its order", "[cli]") {
    // A three-factor product kernel has interaction order 3; at order 2 the
    // randomized energies go negative and the verification must fail.
    const auto kernel = product_kernel_json(3);
    const auto r = run_cli("verify-kernel --kernel " + kernel.string() +
                           " --order 2 --trials 40 --seed 3 --dim 1");
    REQUIRE(r.exit_code == 3);
    const auto j = ordered_json::parse(r.out);
    REQUIRE(j["passed"] == false);
}

// ==== frechet ==============================================================

TEST_CASE("frechet identity across all orders", "[cli]") {
    const auto r = run_cli("frechet --ell 3 --t 1,2,3");
    REQUIRE(r.exit_code == 0);
    const auto j = ordered_json::parse(r.out);
    REQUIRE(j["passed"] == true);
    REQUIRE(j["reports"].size() == 4); // k = 0..3
    REQUIRE(run_cli("frechet --ell 3 --t 1,2").exit_code == 2);
}
