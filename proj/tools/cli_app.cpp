#include "cli_app.hpp"

#include "dynn/error.hpp"
#include "dynn/io.hpp"
#include "dynn/network.hpp"
#include "dynn/oracle.hpp"
#include "dynn/simulate.hpp"
#include "dynn/systems.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace dynn::cli {

namespace {

using io::json;

struct Options {
    // where the LTI system comes from
    std::string model, system;
    Index grid_n = 20;
    double diffusivity = std::numeric_limits<double>::quiet_NaN();
    double vx = 0.6, vy = 0.0;
    std::uint64_t seed = 0;
    Index states = 6, inputs = 2, outputs = 2;
    int first_index = 1;

    // input signal
    std::string input, generator = "auto", interp = "linear";
    double t0 = 0.0, tf = 10.0, dt = 0.1;

    // network / solver
    std::size_t clusters = 0;
    std::string clustering = "kmeans";
    double max_cond = 15.0;
    std::string params, method = "rk45", mode = "whole";
    double rtol = 1e-10, atol = 1e-10, stepped_dt = 0.1;
    std::optional<double> grid;
    std::vector<double> snapshots;
    std::string range = "1:10";

    std::string out, manifest, svg, input_out, config;
};

struct Loaded {
    StateSpace ss;
    std::string name;
    systems::SourceBuilder source;
    std::size_t blob_count = 0;
};

template <class T>
void from_config(const CLI::App* app, const char* flag, const json& cfg, const char* key, T& var) {
    const CLI::Option* opt = app->get_option_no_throw(flag);
    if (opt && opt->count() > 0) return;
    if (!cfg.contains(key)) return;
    try {
        var = cfg[key].get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("config key \"") + key + "\": " + e.what());
    }
}

json load_config(const Options& o) {
    std::string path = o.config;
    if (path.empty())
        if (const char* env = std::getenv("DYNN_CONFIG")) path = env;
    if (path.empty()) return json::object();
    json j = io::read_json_file(path);
    if (!j.is_object()) throw ParseError(path + ": config must be a JSON object");
    return j;
}

void apply_config(const CLI::App* sub, Options& o, const json& cfg) {
    from_config(sub, "--rtol", cfg, "rtol", o.rtol);
    from_config(sub, "--atol", cfg, "atol", o.atol);
    from_config(sub, "--method", cfg, "method", o.method);
    from_config(sub, "--L", cfg, "L", o.clusters);
    from_config(sub, "--seed", cfg, "seed", o.seed);
    from_config(sub, "--max-cond", cfg, "max_cond", o.max_cond);
    from_config(sub, "--clustering", cfg, "clustering", o.clustering);
    from_config(sub, "--mode", cfg, "mode", o.mode);
    from_config(sub, "--stepped-dt", cfg, "stepped_dt", o.stepped_dt);
    from_config(sub, "--interp", cfg, "interp", o.interp);
    from_config(sub, "--t0", cfg, "t0", o.t0);
    from_config(sub, "--tf", cfg, "tf", o.tf);
    from_config(sub, "--dt", cfg, "dt", o.dt);
}

Loaded load_system(const Options& o) {
    if (!o.model.empty() && !o.system.empty()) throw ParseError("give either --model or --system, not both");
    Loaded l;
    if (!o.model.empty()) {
        l.ss = io::read_model(o.model);
        l.name = o.model;
        return l;
    }
    if (o.system.empty()) throw ParseError("one of --model or --system is required");
    l.name = o.system;
    if (o.system == "diffusion2d") {
        auto g = systems::default_diffusion_grid();
        g.nx = g.ny = o.grid_n;
        g.h = g.lx / static_cast<double>(o.grid_n);
        auto pde = systems::make_diffusion2d(g, std::isnan(o.diffusivity) ? 0.8 : o.diffusivity);
        l.ss = pde.ss;
        l.source = pde.source;
    } else if (o.system == "convdiff2d") {
        auto g = systems::default_convdiff_grid();
        g.nx = g.ny = o.grid_n;
        g.h = g.lx / static_cast<double>(o.grid_n);
        g.ly = g.h * static_cast<double>(o.grid_n - 1);
        auto pde = systems::make_convdiff2d(g, std::isnan(o.diffusivity) ? 1.4 : o.diffusivity, o.vx, o.vy);
        l.ss = pde.ss;
        l.source = pde.source;
    } else if (o.system == "ladder") {
        l.ss = systems::make_conditioning_ladder(o.seed, o.first_index);
    } else if (o.system == "mixed") {
        auto g = systems::make_mixed_cluster_system(o.seed);
        l.ss = g.ss;
        l.blob_count = g.blob_count;
    } else if (o.system == "random") {
        auto g = systems::make_random_blob_system(o.seed, o.states, o.inputs, o.outputs);
        l.ss = g.ss;
        l.blob_count = g.blob_count;
    } else {
        throw ParseError("unknown system '" + o.system + "'");
    }
    return l;
}

Interpolation interp_mode(const std::string& s) {
    if (s == "linear") return Interpolation::linear;
    if (s == "constant") return Interpolation::constant;
    throw ParseError("--interp must be linear or constant");
}

struct Samples {
    std::vector<double> times;
    Matrix values;
};

Samples load_input(const Options& o, Index dim, const Loaded* sys) {
    Samples s;
    if (!o.input.empty()) {
        auto t = io::read_trace_csv(o.input);
        if (t.values.cols() != dim)
            throw PreconditionError("input has " + std::to_string(t.values.cols()) + " channels, expected " +
                                    std::to_string(dim));
        s.times = std::move(t.times);
        s.values = std::move(t.values);
        return s;
    }
    s.times = systems::uniform_grid(o.t0, o.tf, o.dt);
    std::string gen = o.generator;
    if (gen == "auto") gen = sys && sys->source ? "source" : "sine";
    if (gen == "sine") {
        s.values = systems::sine_input(s.times, dim);
    } else if (gen == "zero") {
        s.values = Matrix::Zero(static_cast<Index>(s.times.size()), dim);
    } else if (gen == "source") {
        if (!sys || !sys->source) throw ParseError("--input-generator source needs a PDE --system");
        s.values = sys->source(s.times);
        if (s.values.cols() != dim) throw PreconditionError("source input width does not match the network");
    } else {
        throw ParseError("--input-generator must be auto, sine, zero or source");
    }
    return s;
}

SolverConfig solver_config(const Options& o) {
    SolverConfig c;
    c.method = o.method;
    c.rtol = o.rtol;
    c.atol = o.atol;
    return c;
}

json config_json(const Options& o) {
    return {{"rtol", o.rtol}, {"atol", o.atol}, {"method", o.method}, {"L", o.clusters}, {"seed", o.seed},
            {"clustering", o.clustering}, {"max_cond", o.max_cond}, {"mode", o.mode}, {"stepped_dt", o.stepped_dt},
            {"interp", o.interp}};
}

std::string manifest_path(const Options& o, const std::string& fallback) {
    if (!o.manifest.empty()) return o.manifest;
    if (!fallback.empty()) return fallback + ".manifest.json";
    return {};
}

void write_manifest(const Options& o, const std::string& fallback, const io::RunManifest& m) {
    const std::string path = manifest_path(o, fallback);
    if (!path.empty()) io::write_json_file(path, io::manifest_to_json(m));
}

void report_warnings(std::ostream& err, const std::vector<std::string>& w) {
    for (const auto& s : w) err << "warning: " << s << "\n";
}

ForwardResult run_forward(const Options& o, const DynnParams& p, const InputSignal& u, double t0, double tf) {
    const SolverConfig cfg = solver_config(o);
    if (o.mode == "whole") return forward_pass_whole(p, u, t0, tf, cfg);
    if (o.mode == "stepped") return forward_pass_stepped(p, u, t0, tf, o.stepped_dt, cfg);
    throw ParseError("--mode must be whole or stepped");
}

std::vector<double> output_grid(const Options& o, const Samples& s) {
    if (!o.grid) return s.times;
    return systems::uniform_grid(s.times.front(), s.times.back(), *o.grid);
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_build(const Options& o, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    if (o.out.empty()) throw ParseError("build needs --out");
    const Loaded sys = load_system(o);
    const std::size_t L = o.clusters ? o.clusters : sys.blob_count;
    if (L == 0) throw ParseError("build needs --L");
    PreprocessOptions popts;
    popts.clustering.algorithm = o.clustering;
    popts.clustering.seed = o.seed;
    popts.max_cond = o.max_cond;
    const BuildResult br = build_dynn(sys.ss, L, popts);
    io::write_params(o.out, br.params);

    const auto arch = summarize(br.params);
    report_warnings(err, br.lti.warnings);
    out << "layers: " << arch.layer_sizes.size() << "\n";
    out << "neurons: " << arch.first_order << " first-order, " << arch.second_order << " second-order\n";
    out << "cond_t: " << io::format_double(br.lti.cond_t) << "\n";

    io::RunManifest m;
    m.command = "build";
    m.config = config_json(o);
    m.config["L"] = L;
    m.files = {{"model", sys.name}, {"params", o.out}};
    m.cond_t = br.lti.cond_t;
    m.layer_sizes = arch.layer_sizes;
    m.warnings = br.lti.warnings;
    json classes = json::array();
    for (const auto& b : br.lti.blocks) classes.push_back(to_string(b.cls));
    m.errors = json::object();
    m.config["block_classes"] = classes;
    m.config["unitary_path"] = br.lti.unitary_path;
    m.seconds = elapsed(start);
    write_manifest(o, o.out, m);
    return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    if (o.params.empty()) throw ParseError("simulate needs --params");
    auto p = std::make_shared<DynnParams>(io::read_params(o.params));
    std::optional<Loaded> sys;
    if (!o.model.empty() || !o.system.empty()) sys = load_system(o);
    const Samples s = load_input(o, p->input_dim, sys ? &*sys : nullptr);
    const InputSignal u = InputSignal::sampled(s.times, s.values, interp_mode(o.interp));
    report_warnings(err, u.warnings());
    const ForwardResult fr = run_forward(o, *p, u, s.times.front(), s.times.back());
    const auto grid = output_grid(o, s);
    const Matrix y = fr.output.sample(grid);
    if (o.out.empty())
        out << io::format_trace_csv(grid, y);
    else
        io::write_trace_csv(o.out, grid, y);

    io::RunManifest m;
    m.command = "simulate";
    m.config = config_json(o);
    m.files = {{"params", o.params}, {"input", o.input.empty() ? "generator:" + o.generator : o.input}, {"trace", o.out}};
    m.layer_sizes = summarize(*p).layer_sizes;
    m.nfe = fr.nfe.per_neuron;
    m.warnings = u.warnings();
    m.seconds = elapsed(start);
    write_manifest(o, o.out, m);
    return 0;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const Loaded sys = load_system(o);
    DynnParams p;
    std::optional<double> cond;
    std::vector<std::string> warnings;
    if (!o.params.empty()) {
        p = io::read_params(o.params);
        if (p.input_dim != sys.ss.inputs() || p.output_dim != sys.ss.outputs() || p.state_count() != sys.ss.states())
            throw PreconditionError("model and params dimensions differ");
    } else {
        const std::size_t L = o.clusters ? o.clusters : sys.blob_count;
        if (L == 0) throw ParseError("compare needs --params or --L");
        PreprocessOptions popts;
        popts.clustering.algorithm = o.clustering;
        popts.clustering.seed = o.seed;
        popts.max_cond = o.max_cond;
        BuildResult br = build_dynn(sys.ss, L, popts);
        p = std::move(br.params);
        cond = br.lti.cond_t;
        warnings = br.lti.warnings;
    }
    const Samples s = load_input(o, sys.ss.inputs(), &sys);
    const Interpolation mode = interp_mode(o.interp);
    const InputSignal u = InputSignal::sampled(s.times, s.values, mode);
    warnings.insert(warnings.end(), u.warnings().begin(), u.warnings().end());
    report_warnings(err, warnings);

    const auto ref = oracle::lsim_exact(sys.ss, s.times, s.values, mode);
    const ForwardResult fr = run_forward(o, p, u, s.times.front(), s.times.back());
    const Matrix y = fr.output.sample(s.times);

    std::vector<Index> rows;
    if (o.snapshots.empty()) {
        for (Index k = 0; k < static_cast<Index>(s.times.size()); ++k) rows.push_back(k);
    } else {
        for (double ts : o.snapshots) {
            Index best = 0;
            for (Index k = 0; k < static_cast<Index>(s.times.size()); ++k)
                if (std::abs(s.times[static_cast<std::size_t>(k)] - ts) < std::abs(s.times[static_cast<std::size_t>(best)] - ts))
                    best = k;
            if (std::abs(s.times[static_cast<std::size_t>(best)] - ts) > 1e-9)
                throw PreconditionError("snapshot time " + io::format_double(ts) + " is not on the input grid");
            rows.push_back(best);
        }
    }
    const Index d = y.cols();
    std::vector<double> tt;
    Matrix abs_err(static_cast<Index>(rows.size()), d), rel_err(static_cast<Index>(rows.size()), d);
    Vector scale = ref.outputs.cwiseAbs().colwise().maxCoeff().transpose();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        tt.push_back(s.times[static_cast<std::size_t>(rows[r])]);
        for (Index j = 0; j < d; ++j) {
            const double e = std::abs(y(rows[r], j) - ref.outputs(rows[r], j));
            const double floor = std::max(1e-8 * scale(j), std::numeric_limits<double>::min());
            abs_err(static_cast<Index>(r), j) = e;
            rel_err(static_cast<Index>(r), j) = e / std::max(std::abs(ref.outputs(rows[r], j)), floor);
        }
    }
    const double max_abs = abs_err.size() ? abs_err.maxCoeff() : 0.0;
    const double max_rel = rel_err.size() ? rel_err.maxCoeff() : 0.0;
    out << "max_abs_error: " << io::format_double(max_abs) << "\n";
    out << "max_rel_error: " << io::format_double(max_rel) << "\n";
    if (cond) out << "cond_t: " << io::format_double(*cond) << "\n";
    out << "total_nfe: " << fr.nfe.total() << "\n";

    if (!o.out.empty()) io::write_trace_csv(o.out, tt, abs_err, "abs");
    if (!o.svg.empty()) {
        std::vector<double> worst_abs(tt.size()), worst_rel(tt.size());
        for (std::size_t r = 0; r < tt.size(); ++r) {
            worst_abs[r] = d ? abs_err.row(static_cast<Index>(r)).maxCoeff() : 0.0;
            worst_rel[r] = d ? rel_err.row(static_cast<Index>(r)).maxCoeff() : 0.0;
        }
        io::write_text_file(o.svg, io::svg_polylines(tt, {{"max abs error", worst_abs}, {"max rel error", worst_rel}},
                                                     "DyNN vs exact propagation", true));
    }

    io::RunManifest m;
    m.command = "compare";
    m.config = config_json(o);
    m.files = {{"model", sys.name}, {"params", o.params}, {"errors_csv", o.out}, {"svg", o.svg}};
    m.cond_t = cond;
    m.layer_sizes = summarize(p).layer_sizes;
    m.nfe = fr.nfe.per_neuron;
    json per_dim = json::array();
    for (Index j = 0; j < d; ++j)
        per_dim.push_back({{"max_abs", abs_err.col(j).maxCoeff()}, {"max_rel", rel_err.col(j).maxCoeff()}});
    m.errors = {{"max_abs", max_abs}, {"max_rel", max_rel}, {"per_output", per_dim}};
    m.warnings = warnings;
    m.seconds = elapsed(start);
    write_manifest(o, o.out, m);
    return 0;
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& r) {
    const auto colon = r.find(':');
    try {
        if (colon == std::string::npos) {
            const auto v = std::stoul(r);
            return {v, v};
        }
        return {std::stoul(r.substr(0, colon)), std::stoul(r.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ParseError("--range must look like 1:10");
    }
}

std::string status_of(const PreconditionError& e) {
    if (dynamic_cast<const ForcedSplitError*>(&e)) return "forced_split";
    if (dynamic_cast<const SpectraNotSeparatedError*>(&e)) return "spectra_not_separated";
    if (dynamic_cast<const InseparableBlocksError*>(&e)) return "inseparable_blocks";
    if (dynamic_cast<const GMembershipError*>(&e)) return "not_in_G";
    if (dynamic_cast<const OverflowError*>(&e)) return "overflow";
    if (dynamic_cast<const ConvergenceError*>(&e)) return "no_convergence";
    return "precondition";
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    const Loaded sys = load_system(o);
    const auto [lo, hi] = parse_range(o.range);
    const auto n = static_cast<std::size_t>(sys.ss.states());
    if (lo < 1 || hi < lo || hi > n) throw PreconditionError("L range must lie within [1, " + std::to_string(n) + "]");
    PreprocessOptions popts;
    popts.clustering.algorithm = o.clustering;
    popts.clustering.seed = o.seed;
    std::string csv = "L,cond_t,layer_count,status\r\n";
    json rows = json::array();
    for (std::size_t L = lo; L <= hi; ++L) {
        std::string cond = "", layers = "", status = "ok";
        try {
            const TransformedLTI t = preprocess_lti(sys.ss, L, popts);
            cond = io::format_double(t.cond_t);
            layers = std::to_string(t.layout.count());
            rows.push_back({{"L", L}, {"cond_t", t.cond_t}, {"layers", t.layout.count()}, {"status", status}});
        } catch (const PreconditionError& e) {
            status = status_of(e);
            err << "L=" << L << ": " << e.what() << "\n";
            rows.push_back({{"L", L}, {"status", status}, {"message", e.what()}});
        }
        csv += std::to_string(L) + "," + cond + "," + layers + "," + status + "\r\n";
    }
    if (o.out.empty())
        out << csv;
    else
        io::write_text_file(o.out, csv);
    io::RunManifest m;
    m.command = "sweep";
    m.config = config_json(o);
    m.config["range"] = o.range;
    m.files = {{"model", sys.name}, {"csv", o.out}};
    m.errors = {{"rows", rows}};
    m.seconds = elapsed(start);
    write_manifest(o, o.out, m);
    return 0;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream&) {
    if (o.out.empty()) throw ParseError("export-system needs --out");
    const Loaded sys = load_system(o);
    io::write_model(o.out, sys.ss);
    if (!o.input_out.empty()) {
        const Samples s = load_input(o, sys.ss.inputs(), &sys);
        io::write_trace_csv(o.input_out, s.times, s.values, "u");
    }
    out << "states: " << sys.ss.states() << ", inputs: " << sys.ss.inputs() << ", outputs: " << sys.ss.outputs() << "\n";
    return 0;
}

void add_system_options(CLI::App* c, Options& o) {
    c->add_option("--model", o.model, "LTI model JSON {A,B,C,D}");
    c->add_option("--system", o.system, "built-in system: diffusion2d, convdiff2d, ladder, mixed, random");
    c->add_option("--n", o.grid_n, "grid points per direction (PDE systems)")->check(CLI::Range(3, 1000));
    c->add_option("--diffusivity", o.diffusivity, "diffusion coefficient (PDE systems)");
    c->add_option("--vx", o.vx, "x velocity (convdiff2d)");
    c->add_option("--vy", o.vy, "y velocity (convdiff2d)");
    c->add_option("--seed", o.seed, "generator and clustering seed");
    c->add_option("--first-index", o.first_index, "first eigenvalue index n of the ladder");
    c->add_option("--states", o.states, "state dimension (random)");
    c->add_option("--inputs", o.inputs, "input dimension (random)");
    c->add_option("--outputs", o.outputs, "output dimension (random)");
}

void add_input_options(CLI::App* c, Options& o) {
    c->add_option("--input", o.input, "input CSV: t,u_1..u_di");
    c->add_option("--input-generator", o.generator, "auto, sine, zero or source");
    c->add_option("--t0", o.t0, "start of the generated input grid");
    c->add_option("--tf", o.tf, "end of the generated input grid");
    c->add_option("--dt", o.dt, "spacing of the generated input grid");
    c->add_option("--interp", o.interp, "linear or constant");
}

void add_solver_options(CLI::App* c, Options& o) {
    c->add_option("--rtol", o.rtol, "relative tolerance");
    c->add_option("--atol", o.atol, "absolute tolerance");
    c->add_option("--method", o.method, "integrator (rk45)");
    c->add_option("--mode", o.mode, "whole or stepped");
    c->add_option("--stepped-dt", o.stepped_dt, "window length in stepped mode");
}

void add_build_options(CLI::App* c, Options& o) {
    c->add_option("--L", o.clusters, "number of clusters / hidden layers");
    c->add_option("--clustering", o.clustering, "clustering algorithm");
    c->add_option("--max-cond", o.max_cond, "warn when cond_t exceeds this");
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Map LTI systems to dynamic neural networks and simulate them"};
    app.require_subcommand(1);
    app.fallthrough(); // --config may follow the subcommand
    app.add_option("--config", o.config, "JSON config file (default: $DYNN_CONFIG)");

    auto* build = app.add_subcommand("build", "build DyNN parameters from an LTI system");
    add_system_options(build, o);
    add_build_options(build, o);
    build->add_option("--out", o.out, "parameter JSON to write");
    build->add_option("--manifest", o.manifest, "manifest JSON (default <out>.manifest.json)");

    auto* simulate = app.add_subcommand("simulate", "run the DyNN forward pass");
    simulate->add_option("--params", o.params, "parameter JSON");
    add_system_options(simulate, o);
    add_input_options(simulate, o);
    add_solver_options(simulate, o);
    simulate->add_option("--grid", o.grid, "output spacing (default: input times)");
    simulate->add_option("--out", o.out, "trace CSV (default stdout)");
    simulate->add_option("--manifest", o.manifest, "manifest JSON");

    auto* compare = app.add_subcommand("compare", "compare the DyNN against exact propagation");
    compare->add_option("--params", o.params, "parameter JSON (otherwise built with --L)");
    add_system_options(compare, o);
    add_build_options(compare, o);
    add_input_options(compare, o);
    add_solver_options(compare, o);
    compare->add_option("--snapshots", o.snapshots, "restrict the error to these times")->delimiter(',');
    compare->add_option("--out", o.out, "per-time absolute error CSV");
    compare->add_option("--svg", o.svg, "error plot");
    compare->add_option("--manifest", o.manifest, "manifest JSON");

    auto* sweep = app.add_subcommand("sweep", "cond_t over a range of cluster counts");
    add_system_options(sweep, o);
    sweep->add_option("--range", o.range, "L range lo:hi");
    sweep->add_option("--clustering", o.clustering, "clustering algorithm");
    sweep->add_option("--out", o.out, "CSV (default stdout)");
    sweep->add_option("--manifest", o.manifest, "manifest JSON");

    auto* exporter = app.add_subcommand("export-system", "write a built-in system as a model JSON");
    add_system_options(exporter, o);
    add_input_options(exporter, o);
    exporter->add_option("--out", o.out, "model JSON");
    exporter->add_option("--input-out", o.input_out, "also write the default input CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        apply_config(sub, o, load_config(o));
        if (sub == build) return cmd_build(o, out, err);
        if (sub == simulate) return cmd_simulate(o, out, err);
        if (sub == compare) return cmd_compare(o, out, err);
        if (sub == sweep) return cmd_sweep(o, out, err);
        return cmd_export(o, out, err);
    } catch (const ParseError& e) {
        err << "error[parse]: " << e.what() << "\n";
        return 1;
    } catch (const IntegrationError& e) {
        err << "error[integration]: " << e.what() << " (layer " << e.layer() << ", neuron " << e.neuron()
            << ", t=" << io::format_double(e.t()) << ")\n";
        return 3;
    } catch (const ForcedSplitError& e) {
        err << "error[forced split]: " << e.what() << " (requested " << e.requested() << ", distinct " << e.distinct()
            << ")\n";
        return 2;
    } catch (const SpectraNotSeparatedError& e) {
        err << "error[spectra not separated]: " << e.what() << " (blocks " << e.block_i() << ", " << e.block_j()
            << ", gap " << io::format_double(e.gap()) << ")\n";
        return 2;
    } catch (const PreconditionError& e) {
        err << "error[precondition]: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace dynn::cli
