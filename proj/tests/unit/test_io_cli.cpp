#include "helpers.hpp"

#include "cli_app.hpp"
#include "dynn/error.hpp"
#include "dynn/io.hpp"
#include "dynn/network.hpp"
#include "dynn/systems.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

using namespace dynn;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run dynn_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "dynn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("dynn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

StateSpace scalar_system() {
    return {Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 1.0), Matrix::Zero(1, 1)};
}

double field(const std::string& text, const std::string& key) {
    const auto p = text.find(key);
    REQUIRE(p != std::string::npos);
    return std::stod(text.substr(text.find(':', p) + 1));
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("matrices keep every bit and non-finite values") {
    Rng rng(2);
    Matrix m = random_matrix(rng, 3, 4);
    m(0, 0) = std::numeric_limits<double>::infinity();
    m(1, 1) = -std::numeric_limits<double>::infinity();
    m(2, 2) = 1.0 / 3.0;
    const auto j = io::json::parse(io::dump_json(io::matrix_to_json(m)));
    const Matrix back = io::matrix_from_json(j, "m");
    CHECK(back == m);
    Matrix n = Matrix::Zero(1, 1);
    n(0, 0) = std::nan("");
    CHECK(std::isnan(io::matrix_from_json(io::matrix_to_json(n), "n")(0, 0)));
    CHECK_THROWS_AS(io::matrix_from_json(io::json::parse("[[1,2],[3]]"), "ragged"), ParseError);
    CHECK_THROWS_AS(io::matrix_from_json(io::json::parse("[[1,\"x\"]]"), "text"), ParseError);
}

TEST_CASE("model files") {
    TempDir dir;
    const auto g = systems::make_random_blob_system(1, 5, 2, 3);
    io::write_model(dir / "m.json", g.ss);
    const auto back = io::read_model(dir / "m.json");
    CHECK(back.a == g.ss.a);
    CHECK(back.b == g.ss.b);
    CHECK(back.c == g.ss.c);
    CHECK(back.d == g.ss.d);

    const auto nod = io::model_from_json(io::json::parse(R"({"A":[[-1]],"B":[[1]],"C":[[2],[3]]})"));
    CHECK(nod.d == Matrix::Zero(2, 1));
    CHECK_THROWS_AS(io::model_from_json(io::json::parse(R"({"A":[[-1,0]],"B":[[1]],"C":[[1]]})")), ParseError);
    CHECK_THROWS_AS(io::model_from_json(io::json::parse(R"({"B":[[1]],"C":[[1]]})")), ParseError);
    spit(dir / "bad.json", "{\"A\": [[1,");
    CHECK_THROWS_AS(io::read_model(dir / "bad.json"), ParseError);
    CHECK_THROWS_AS(io::read_model(dir / "missing.json"), ParseError);
}

TEST_CASE("parameter files") {
    TempDir dir;
    const auto g = systems::make_mixed_cluster_system(1);
    const auto r = build_dynn(g.ss, 6);
    io::write_params(dir / "p.json", r.params);
    const auto p = io::read_params(dir / "p.json");
    REQUIRE(p.layers.size() == r.params.layers.size());
    CHECK(p.psi == r.params.psi);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        CHECK(p.layers[l].k_r == r.params.layers[l].k_r);
        CHECK(p.layers[l].k_c == r.params.layers[l].k_c);
        for (std::size_t i = 0; i < p.layers[l].size(); ++i) {
            const auto &a = p.layers[l].neurons[i], &b = r.params.layers[l].neurons[i];
            CHECK(a.order == b.order);
            CHECK(a.m == b.m);
            CHECK(a.c == b.c);
            CHECK(a.k == b.k);
            CHECK(a.w == b.w);
            CHECK(p.phi[l][i] == r.params.phi[l][i]);
        }
    }
    auto j = io::params_to_json(r.params);
    j["format"] = "something-else";
    CHECK_THROWS_AS(io::params_from_json(j), ParseError);
}

TEST_CASE("trace CSV") {
    const std::vector<double> t{0.0, 0.1, 0.30000000000000004};
    Matrix v(3, 2);
    v << 1, -2, 1e-300, 3.5, 0.1, 7;
    const std::string text = io::format_trace_csv(t, v, "u");
    CHECK(text.rfind("t,u_1,u_2\r\n", 0) == 0);
    const auto tab = io::parse_trace_csv(text);
    CHECK(tab.times == t);
    CHECK(tab.values == v);
    CHECK(tab.header == std::vector<std::string>{"t", "u_1", "u_2"});

    const auto quoted = io::parse_trace_csv("\"t\",\"a,b\"\n0,1\n1,2\n");
    CHECK(quoted.header[1] == "a,b");
    CHECK(quoted.values(1, 0) == 2.0);
    const auto bare = io::parse_trace_csv("0,1\n0.5,2\n");
    CHECK(bare.times.size() == 2);
    CHECK_THROWS_AS(io::parse_trace_csv("t,u\n0,1\n0,2\n"), ParseError);
    CHECK_THROWS_AS(io::parse_trace_csv("t,u\n0,1\n1,2,3\n"), ParseError);
    CHECK_THROWS_AS(io::parse_trace_csv("t,u\n0,x\n"), ParseError);
}

TEST_CASE("run manifest") {
    io::RunManifest m;
    m.command = "compare";
    m.config = {{"rtol", 1e-10}};
    m.files["params"] = "p.json";
    m.seconds = 1.25;
    m.cond_t = 12.5;
    m.layer_sizes = {3, 1};
    m.nfe = {{10, 20, 30}, {40}};
    m.errors = {{"max_abs", 1e-9}};
    m.warnings = {"w"};
    const auto back = io::manifest_from_json(io::json::parse(io::dump_json(io::manifest_to_json(m))));
    CHECK(back.command == m.command);
    CHECK(back.config == m.config);
    CHECK(back.files == m.files);
    CHECK(back.seconds == m.seconds);
    CHECK(back.cond_t == m.cond_t);
    CHECK(back.layer_sizes == m.layer_sizes);
    CHECK(back.nfe == m.nfe);
    CHECK(back.errors == m.errors);
    CHECK(back.warnings == m.warnings);
}

TEST_CASE("svg output") {
    const std::string s = io::svg_polylines({0, 1, 2}, {{"err", {1e-3, 1e-9, 0.0}}}, "errors", true);
    CHECK(s.find("<svg") != std::string::npos);
    CHECK(s.find("<polyline") != std::string::npos);
    CHECK(s.find("nan") == std::string::npos);
}

}

TEST_SUITE("cli") {

TEST_CASE("exit codes") {
    TempDir dir;
    spit(dir / "bad.json", "{ not json");
    const auto r1 = dynn_cli({"build", "--model", dir / "bad.json", "--L", "1", "--out", dir / "p.json"});
    CHECK(r1.code == 1);
    CHECK_FALSE(r1.err.empty());

    StateSpace rep{Matrix::Zero(3, 3), Matrix::Ones(3, 1), Matrix::Ones(1, 3), Matrix::Zero(1, 1)};
    rep.a << -1, 1, 0, 0, -1, 0, 0, 0, -2;
    io::write_model(dir / "rep.json", rep);
    const auto r2 = dynn_cli({"build", "--model", dir / "rep.json", "--L", "3", "--out", dir / "p.json"});
    CHECK(r2.code == 2);
    CHECK(r2.err.find("forced split") != std::string::npos);

    CHECK(dynn_cli({"build", "--no-such-flag"}).code == 1);
    CHECK(dynn_cli({"--help"}).code == 0);
    CHECK(dynn_cli({"build", "--system", "nonsense", "--out", dir / "p.json"}).code != 0);
}

TEST_CASE("build") {
    TempDir dir;
    SUBCASE("diffusion gives 400 single-neuron layers") {
        const auto r = dynn_cli({"build", "--system", "diffusion2d", "--n", "20", "--L", "400", "--out", dir / "p.json"});
        REQUIRE(r.code == 0);
        const auto p = io::read_params(dir / "p.json");
        CHECK(p.layers.size() == 400);
        for (const auto& l : p.layers) CHECK(l.size() == 1);
        const auto m = io::manifest_from_json(io::read_json_file(dir / "p.json.manifest.json"));
        REQUIRE(m.cond_t.has_value());
        CHECK(std::abs(*m.cond_t - 1.0) <= 1e-9);
    }
    SUBCASE("ladder with ten layers warns about conditioning") {
        const auto r = dynn_cli({"build", "--system", "ladder", "--L", "10", "--out", dir / "p.json"});
        CHECK(r.code == 0);
        CHECK(r.err.find("warning") != std::string::npos);
    }
}

TEST_CASE("simulate") {
    TempDir dir;
    REQUIRE(dynn_cli({"build", "--system", "ladder", "--L", "4", "--out", dir / "p.json"}).code == 0);
    SUBCASE("zero input gives an all-zero trace") {
        const auto r = dynn_cli({"simulate", "--params", dir / "p.json", "--input-generator", "zero", "--tf", "3", "--out", dir / "y.csv"});
        REQUIRE(r.code == 0);
        const auto t = io::read_trace_csv(dir / "y.csv");
        CHECK(t.times.size() == 31);
        CHECK(max_abs(t.values) == 0.0);
    }
    SUBCASE("stepped mode agrees with whole-domain mode") {
        REQUIRE(dynn_cli({"simulate", "--params", dir / "p.json", "--out", dir / "w.csv"}).code == 0);
        REQUIRE(dynn_cli({"simulate", "--params", dir / "p.json", "--mode", "stepped", "--stepped-dt", "0.1", "--out", dir / "s.csv"}).code == 0);
        const auto w = io::read_trace_csv(dir / "w.csv"), s = io::read_trace_csv(dir / "s.csv");
        CHECK(w.times == s.times);
        CHECK(max_abs(w.values - s.values) <= 1e-6);
    }
    SUBCASE("input dimension mismatch") {
        io::write_trace_csv(dir / "u.csv", {0.0, 1.0}, Matrix::Ones(2, 3), "u");
        const auto r = dynn_cli({"simulate", "--params", dir / "p.json", "--input", dir / "u.csv"});
        CHECK(r.code == 2);
    }
    SUBCASE("user grid times appear exactly") {
        REQUIRE(dynn_cli({"simulate", "--params", dir / "p.json", "--tf", "2", "--grid", "0.25", "--out", dir / "g.csv"}).code == 0);
        const auto g = io::read_trace_csv(dir / "g.csv");
        CHECK(g.times == std::vector<double>{0, 0.25, 0.5, 0.75, 1, 1.25, 1.5, 1.75, 2});
    }
}

TEST_CASE("diffusion traces are reproducible bit for bit") {
    TempDir dir;
    REQUIRE(dynn_cli({"build", "--system", "diffusion2d", "--n", "20", "--L", "400", "--out", dir / "p.json"}).code == 0);
    REQUIRE(dynn_cli({"simulate", "--params", dir / "p.json", "--system", "diffusion2d", "--tf", "2", "--out", dir / "a.csv"}).code == 0);
    REQUIRE(dynn_cli({"simulate", "--params", dir / "p.json", "--system", "diffusion2d", "--tf", "2", "--out", dir / "b.csv"}).code == 0);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a.size() > 1000);
    CHECK(a == slurp(dir / "b.csv"));
}

TEST_CASE("compare") {
    TempDir dir;
    io::write_model(dir / "scalar.json", scalar_system());
    const auto r = dynn_cli({"compare", "--model", dir / "scalar.json", "--L", "1", "--out", dir / "err.csv", "--svg", dir / "err.svg"});
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "max_abs_error") <= 1e-8);
    CHECK(fs::exists(dir / "err.csv"));
    CHECK(slurp(dir / "err.svg").find("<svg") != std::string::npos);

    const auto m = dynn_cli({"compare", "--system", "mixed", "--L", "6", "--manifest", dir / "c.json"});
    REQUIRE(m.code == 0);
    CHECK(field(m.out, "max_abs_error") <= 1e-5);
    const auto man = io::manifest_from_json(io::read_json_file(dir / "c.json"));
    CHECK(man.layer_sizes.size() == 6);
    CHECK(man.nfe.size() == 6);
}

TEST_CASE("sweep") {
    TempDir dir;
    const auto r = dynn_cli({"sweep", "--system", "ladder", "--range", "1:10", "--out", dir / "s.csv"});
    REQUIRE(r.code == 0);
    std::istringstream in(slurp(dir / "s.csv"));
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("L,cond_t,layer_count,status", 0) == 0);
    int rows = 0;
    double prev = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++rows;
        CHECK(line.find(",ok") != std::string::npos);
        const double c = std::stod(line.substr(line.find(',') + 1));
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(rows == 10);
    CHECK(prev >= 1e4);

    CHECK(dynn_cli({"sweep", "--system", "ladder", "--range", "9:11"}).code == 2);

    StateSpace rep{Matrix::Zero(3, 3), Matrix::Ones(3, 1), Matrix::Ones(1, 3), Matrix::Zero(1, 1)};
    rep.a << -1, 1, 0, 0, -1, 0, 0, 0, -2;
    io::write_model(dir / "rep.json", rep);
    REQUIRE(dynn_cli({"sweep", "--model", dir / "rep.json", "--range", "1:3", "--out", dir / "o.csv"}).code == 0);
    const std::string o = slurp(dir / "o.csv");
    CHECK(o.find("2,") != std::string::npos);
    CHECK(o.find("3,,,forced_split") != std::string::npos);
}

TEST_CASE("config precedence") {
    TempDir dir;
    spit(dir / "cfg.json", R"({"rtol": 1e-4, "max_cond": 100, "L": 3})");
    const auto r = dynn_cli({"build", "--config", dir / "cfg.json", "--system", "ladder", "--max-cond", "15", "--out", dir / "p.json"});
    REQUIRE(r.code == 0);
    const auto m = io::manifest_from_json(io::read_json_file(dir / "p.json.manifest.json"));
    CHECK(m.config["max_cond"].get<double>() == 15.0);
    CHECK(m.config["rtol"].get<double>() == 1e-4);
    CHECK(m.config["L"].get<std::size_t>() == 3);
    CHECK(m.config["atol"].get<double>() == 1e-10);

    ::setenv("DYNN_CONFIG", (dir / "cfg.json").c_str(), 1);
    const auto e = dynn_cli({"build", "--system", "ladder", "--out", dir / "q.json"});
    ::unsetenv("DYNN_CONFIG");
    REQUIRE(e.code == 0);
    const auto me = io::manifest_from_json(io::read_json_file(dir / "q.json.manifest.json"));
    CHECK(me.config["max_cond"].get<double>() == 100.0);
    CHECK(me.layer_sizes.size() == 3);

    spit(dir / "bad.json", R"({"rtol": "tight"})");
    CHECK(dynn_cli({"build", "--config", dir / "bad.json", "--system", "ladder", "--out", dir / "p.json"}).code == 1);
}

TEST_CASE("export-system") {
    TempDir dir;
    REQUIRE(dynn_cli({"export-system", "--system", "ladder", "--seed", "0", "--out", dir / "m.json", "--input-out", dir / "u.csv"}).code == 0);
    const auto ss = io::read_model(dir / "m.json");
    CHECK(ss.a == systems::make_conditioning_ladder(0).a);
    CHECK(fs::exists(dir / "u.csv"));
}

}
