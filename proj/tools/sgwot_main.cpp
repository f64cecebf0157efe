#include "sgwot/conflict.hpp"
#include "sgwot/geometry.hpp"
#include "sgwot/io.hpp"
#include "sgwot/sgw.hpp"
#include "sgwot/sketch.hpp"
#include "sgwot/sot.hpp"
#include "sgwot/svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace sgwot;

namespace {

class StageTimer {
public:
    void start(const std::string& name) {
        stop();
        name_ = name;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        if (name_.empty()) return;
        const auto dt = std::chrono::steady_clock::now() - t0_;
        seconds_[name_] = std::chrono::duration<double>(dt).count();
        name_.clear();
    }
    json to_json() {
        stop();
        json out = json::object();
        for (const auto& [k, v] : seconds_) out[k] = v;
        return out;
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, double> seconds_;
};

struct CommonOptions {
    SolverParams params;
    double eta = 1.0;
    std::string kind = "points";
    int knn = 10;
    double dump_tol = 1e-9;
    std::string out_dir = ".";
    std::string config_path;
};

struct LoadedInput {
    std::optional<PointCloud> points;
    DistanceMatrix distances{Matrix::Zero(1, 1)};
};

LoadedInput load_input(const std::string& path, const std::string& kind, int knn) {
    const Matrix raw = read_csv_matrix(path);
    LoadedInput out;
    if (kind == "distance") {
        out.distances = DistanceMatrix(raw);
        return out;
    }
    out.points = PointCloud{raw};
    if (raw.rows() < 2) {
        throw std::runtime_error(path + ": need at least two points");
    }
    const int k = std::min<int>(knn, static_cast<int>(raw.rows()) - 1);
    out.distances = geodesic_distance_matrix(knn_graph(*out.points, k));
    return out;
}

void apply_config_file(CLI::App& app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json cfg = json::parse(in);
    if (!cfg.is_object()) throw std::runtime_error(path + ": config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        CLI::Option* opt = app.get_option_no_throw("--" + key);
        if (opt == nullptr) {
            throw std::runtime_error(path + ": unknown config key '" + key + "'");
        }
        if (opt->count() > 0) continue;  // flags win over the config file
        if (value.is_string()) {
            opt->add_result(value.get<std::string>());
        } else {
            opt->add_result(value.dump());
        }
        opt->run_callback();
    }
}

void add_solver_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--epsilon", opt.params.epsilon, "Entropic regularization coefficient")
        ->capture_default_str();
    cmd->add_option("--gamma", opt.params.gamma, "Marginal-penalty weight")->capture_default_str();
    cmd->add_option("--score-gamma", opt.params.score_gamma,
                    "Penalty weight for cover mass scoring")
        ->capture_default_str();
    cmd->add_option("--rho", opt.params.rho, "Distance-difference threshold")->capture_default_str();
    cmd->add_option("--eta", opt.eta, "Step size in (0,1]; 1 is the large-step limit")
        ->capture_default_str();
    cmd->add_option("--n-covers", opt.params.n_covers, "Greedy cover restarts")
        ->capture_default_str();
    cmd->add_option("--seed", opt.params.seed, "RNG seed")->capture_default_str();
    cmd->add_option("--tol-inner", opt.params.tol_inner, "Inner dual-change tolerance")
        ->capture_default_str();
    cmd->add_option("--tol-outer", opt.params.tol_outer, "Outer relative-change tolerance")
        ->capture_default_str();
    cmd->add_option("--max-inner", opt.params.max_inner, "Inner iteration cap")
        ->capture_default_str();
    cmd->add_option("--max-outer", opt.params.max_outer, "Outer iteration cap")
        ->capture_default_str();
    cmd->add_flag("--rho-squared", opt.params.rho_squared,
                  "Threshold the squared distance difference");
    cmd->add_option("--kind", opt.kind, "Input kind: points or distance")
        ->check(CLI::IsMember({"points", "distance"}))
        ->capture_default_str();
    cmd->add_option("--knn", opt.knn, "Neighbors for the geodesic graph")->capture_default_str();
    cmd->add_option("--dump-tol", opt.dump_tol, "Smallest coupling entry written to CSV")
        ->capture_default_str();
    cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--config", opt.config_path, "JSON file with defaults for these flags");
}

json params_to_json(const SolverParams& p) {
    json out;
    out["epsilon"] = p.epsilon;
    out["gamma"] = p.gamma;
    out["score_gamma"] = p.score_gamma;
    out["rho"] = p.rho;
    out["eta"] = p.eta();
    out["tol_inner"] = p.tol_inner;
    out["tol_outer"] = p.tol_outer;
    out["max_inner"] = p.max_inner;
    out["max_outer"] = p.max_outer;
    out["seed"] = p.seed;
    out["n_covers"] = p.n_covers;
    out["prefix_max"] = p.prefix_max;
    out["rho_squared"] = p.rho_squared;
    return out;
}

void write_report(const fs::path& path, const json& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << report.dump(2) << "\n";
}

int run_match(const std::string& in_a, const std::string& in_b, CommonOptions& opt,
              const std::string& baseline, bool svg, double svg_threshold) {
    opt.params.set_eta(opt.eta);
    opt.params.validate();
    fs::create_directories(opt.out_dir);
    StageTimer timer;

    timer.start("load");
    LoadedInput input_a = load_input(in_a, opt.kind, opt.knn);
    LoadedInput input_b = load_input(in_b, opt.kind, opt.knn);
    timer.start("normalize");
    auto [d1, d2] = normalize_distances(input_a.distances, input_b.distances);
    GwProblem prob(std::move(d1), std::move(d2), opt.params.rho);

    json report;
    report["command"] = baseline == "gw" ? "gw-baseline" : "match";
    report["inputs"] = {in_a, in_b};
    report["params"] = params_to_json(opt.params);
    report["rho_max"] = rho_max(prob);

    SgwResult result;
    if (baseline == "gw") {
        timer.start("solve");
        result = solve_entropic_gw(prob, opt.params);
    } else {
        timer.start("solve");
        result = solve_sgw(prob, opt.params);
    }

    timer.start("write");
    const fs::path out_dir(opt.out_dir);
    write_coupling_csv((out_dir / "coupling.csv").string(), result.coupling.p, opt.dump_tol);

    report["mass"] = result.coupling.mass;
    report["converged"] = result.converged;
    report["outer_iters"] = result.outer_iters;
    report["cover_size"] = result.pattern.size();
    report["cover_mass"] = result.cover_mass;
    json sm = json::array();
    for (const auto& [size, mass] : result.cover_size_mass) sm.push_back({size, mass});
    report["cover_size_mass"] = sm;
    report["quadratic_trace"] = result.quadratic_trace;
    report["penalized_trace"] = result.penalized_trace;
    report["entropic_trace"] = result.entropic_trace;
    report["mass_trace"] = result.mass_trace;
    report["warnings"] = result.warnings;
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    if (svg) {
        if (input_a.points && input_b.points) {
            write_matching_svg((out_dir / "matching.svg").string(), *input_a.points,
                               *input_b.points, result.coupling.p, svg_threshold);
        } else {
            std::cerr << "warning: --svg needs point inputs; skipping matching.svg\n";
        }
    }
    report["timings_seconds"] = timer.to_json();
    write_report(out_dir / "report.json", report);
    return 0;
}

int run_cover_stats(const std::string& in_a, const std::string& in_b, CommonOptions& opt,
                    double prefix_max) {
    opt.params.set_eta(opt.eta);
    opt.params.prefix_max = prefix_max;
    opt.params.validate();
    fs::create_directories(opt.out_dir);
    StageTimer timer;

    timer.start("load");
    LoadedInput input_a = load_input(in_a, opt.kind, opt.knn);
    LoadedInput input_b = load_input(in_b, opt.kind, opt.knn);
    timer.start("normalize");
    auto [d1, d2] = normalize_distances(input_a.distances, input_b.distances);
    timer.start("conflict_graph");
    const ConflictGraph graph =
        build_conflict_graph(d1, d2, opt.params.rho, opt.params.rho_squared);
    timer.start("covers");
    const Marginal a = Marginal::uniform(d1.size());
    const Marginal b = Marginal::uniform(d2.size());
    const CoverSelection sel = select_zero_pattern(graph, a, b, opt.params);

    timer.start("write");
    const fs::path out_dir(opt.out_dir);
    write_covers_csv((out_dir / "covers.csv").string(), sel.size_mass);
    write_cover_scatter_svg((out_dir / "covers.svg").string(), sel.size_mass);

    json report;
    report["command"] = "cover-stats";
    report["inputs"] = {in_a, in_b};
    report["params"] = params_to_json(opt.params);
    report["edge_count"] = graph.edge_count();
    report["best_mass"] = sel.mass;
    report["best_cover_size"] = sel.pattern.size();
    report["timings_seconds"] = timer.to_json();
    write_report(out_dir / "report.json", report);
    return 0;
}

int run_sketch(const std::string& in, CommonOptions& opt, const std::string& method,
               double box_size, double cube_size, double overlap) {
    fs::create_directories(opt.out_dir);
    const Matrix raw = read_csv_matrix(in);
    const PointCloud pc{raw};
    Sketch sketch;
    if (method == "grid") {
        sketch = grid_sketch(pc, box_size, opt.params.seed);
    } else {
        MapperOptions mo;
        mo.cube_size = cube_size;
        mo.overlap = overlap;
        sketch = mapper_sketch(pc, mo, opt.params.seed);
    }
    const fs::path out_dir(opt.out_dir);
    write_representatives_csv((out_dir / "representatives.csv").string(), sketch.rep_point);
    write_assignment_csv((out_dir / "assignment.csv").string(), sketch.assignment);

    json report;
    report["command"] = "sketch";
    report["inputs"] = {in};
    report["method"] = method;
    report["representatives"] = sketch.size();
    report["points"] = pc.size();
    report["seed"] = opt.params.seed;
    write_report(out_dir / "report.json", report);
    return 0;
}

int run_recover(const std::string& in_a, const std::string& in_b, CommonOptions& opt,
                const std::string& reps_a_path, const std::string& reps_b_path,
                const std::string& assign_a_path, const std::string& assign_b_path,
                const std::string& coupling_path, double norm_p, double block_percentile) {
    opt.params.set_eta(opt.eta);
    opt.params.validate();
    fs::create_directories(opt.out_dir);
    StageTimer timer;

    timer.start("load");
    LoadedInput input_a = load_input(in_a, opt.kind, opt.knn);
    LoadedInput input_b = load_input(in_b, opt.kind, opt.knn);
    const std::vector<Index> reps_a = read_representatives_csv(reps_a_path);
    const std::vector<Index> reps_b = read_representatives_csv(reps_b_path);
    const std::vector<Index> assign_a = read_assignment_csv(assign_a_path);
    const std::vector<Index> assign_b = read_assignment_csv(assign_b_path);
    const Matrix p_hat = read_coupling_csv(coupling_path, static_cast<Index>(reps_a.size()),
                                           static_cast<Index>(reps_b.size()));

    const Index n = input_a.distances.size();
    const Index m = input_b.distances.size();
    if (static_cast<Index>(assign_a.size()) != n || static_cast<Index>(assign_b.size()) != m) {
        throw std::runtime_error("assignment length does not match the dataset size");
    }
    for (Index r : assign_a) {
        if (r < 0 || r >= static_cast<Index>(reps_a.size())) {
            throw std::runtime_error("assignment references a representative outside the coupling");
        }
    }
    for (Index r : assign_b) {
        if (r < 0 || r >= static_cast<Index>(reps_b.size())) {
            throw std::runtime_error("assignment references a representative outside the coupling");
        }
    }
    for (Index p : reps_a) {
        if (p < 0 || p >= n) throw std::runtime_error("representative index out of range");
    }
    for (Index p : reps_b) {
        if (p < 0 || p >= m) throw std::runtime_error("representative index out of range");
    }

    timer.start("solve");
    Matrix dhat1(n, static_cast<Index>(reps_a.size()));
    for (std::size_t r = 0; r < reps_a.size(); ++r) {
        dhat1.col(static_cast<Index>(r)) = input_a.distances.values().col(reps_a[r]);
    }
    Matrix dhat2(m, static_cast<Index>(reps_b.size()));
    for (std::size_t r = 0; r < reps_b.size(); ++r) {
        dhat2.col(static_cast<Index>(r)) = input_b.distances.values().col(reps_b[r]);
    }
    RecoverOptions ro;
    ro.norm_order = norm_p;
    ro.block_percentile = block_percentile;
    const RecoverResult result = recover_full_coupling(p_hat, dhat1, dhat2, opt.params, ro);

    timer.start("write");
    const fs::path out_dir(opt.out_dir);
    write_coupling_csv((out_dir / "coupling.csv").string(), result.coupling.p, opt.dump_tol);

    json report;
    report["command"] = "recover";
    report["inputs"] = {in_a, in_b, reps_a_path, reps_b_path, coupling_path};
    report["params"] = params_to_json(opt.params);
    report["mass"] = result.coupling.mass;
    report["norm_order"] = norm_p;
    report["unmatched_sketch_rows"] = result.unmatched_rows;
    report["unmatched_sketch_cols"] = result.unmatched_cols;
    report["inner_converged"] = result.trace.converged;
    report["timings_seconds"] = timer.to_json();
    write_report(out_dir / "report.json", report);
    if (!result.trace.converged) {
        std::cerr << "warning: recovery solve hit the iteration cap\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Supervised Gromov-Wasserstein matching"};
    app.require_subcommand(1);

    // match / gw-baseline
    CommonOptions match_opt;
    std::string match_a, match_b, match_baseline = "sgw";
    bool match_svg = false;
    double match_svg_threshold = 0.1;
    CLI::App* match = app.add_subcommand("match", "Match two datasets");
    match->add_option("input1", match_a, "Points or distance CSV")->required();
    match->add_option("input2", match_b, "Points or distance CSV")->required();
    add_solver_flags(match, match_opt);
    match->add_option("--baseline", match_baseline, "Solver: sgw or gw")
        ->check(CLI::IsMember({"sgw", "gw"}))
        ->capture_default_str();
    match->add_flag("--svg", match_svg, "Write matching.svg (point inputs only)");
    match->add_option("--svg-threshold", match_svg_threshold,
                      "Draw entries above this fraction of max(P)")
        ->capture_default_str();

    CommonOptions gwb_opt;
    std::string gwb_a, gwb_b;
    bool gwb_svg = false;
    double gwb_svg_threshold = 0.1;
    CLI::App* gwb = app.add_subcommand("gw-baseline", "Entropic GW matching (match --baseline gw)");
    gwb->add_option("input1", gwb_a, "Points or distance CSV")->required();
    gwb->add_option("input2", gwb_b, "Points or distance CSV")->required();
    add_solver_flags(gwb, gwb_opt);
    gwb->add_flag("--svg", gwb_svg, "Write matching.svg (point inputs only)");
    gwb->add_option("--svg-threshold", gwb_svg_threshold,
                    "Draw entries above this fraction of max(P)")
        ->capture_default_str();

    // cover-stats
    CommonOptions cover_opt;
    std::string cover_a, cover_b;
    double cover_prefix_max = 0.5;
    CLI::App* cover = app.add_subcommand("cover-stats", "Cover size vs transported mass");
    cover->add_option("input1", cover_a, "Points or distance CSV")->required();
    cover->add_option("input2", cover_b, "Points or distance CSV")->required();
    add_solver_flags(cover, cover_opt);
    cover->add_option("--prefix-max", cover_prefix_max,
                      "Upper bound of the random pre-fixed vertex fraction")
        ->capture_default_str();

    // sketch
    CommonOptions sketch_opt;
    std::string sketch_in, sketch_method = "grid";
    double sketch_box = 1.0, sketch_cube = 1.0, sketch_overlap = 0.25;
    CLI::App* sketch = app.add_subcommand("sketch", "Downsample a point cloud");
    sketch->add_option("input", sketch_in, "Points CSV")->required();
    sketch->add_option("--method", sketch_method, "grid or mapper")
        ->check(CLI::IsMember({"grid", "mapper"}))
        ->capture_default_str();
    sketch->add_option("--box-size", sketch_box, "Grid box side")->capture_default_str();
    sketch->add_option("--cube-size", sketch_cube, "Mapper cube side")->capture_default_str();
    sketch->add_option("--overlap", sketch_overlap, "Mapper cube overlap in [0, 0.5]")
        ->capture_default_str();
    sketch->add_option("--seed", sketch_opt.params.seed, "RNG seed")->capture_default_str();
    sketch->add_option("--out", sketch_opt.out_dir, "Output directory")->capture_default_str();

    // recover
    CommonOptions recover_opt;
    recover_opt.params.epsilon = 0.01;  // the recovery cost lives on a smaller scale
    std::string rec_a, rec_b, rec_reps_a, rec_reps_b, rec_assign_a, rec_assign_b, rec_coupling;
    double rec_norm_p = 2.0, rec_block_percentile = 1.0;
    CLI::App* recover = app.add_subcommand("recover", "Full coupling from a sketch coupling");
    recover->add_option("input1", rec_a, "Full dataset 1 (points or distance CSV)")->required();
    recover->add_option("input2", rec_b, "Full dataset 2 (points or distance CSV)")->required();
    recover->add_option("--reps-a", rec_reps_a, "representatives.csv of sketch 1")->required();
    recover->add_option("--reps-b", rec_reps_b, "representatives.csv of sketch 2")->required();
    recover->add_option("--assign-a", rec_assign_a, "assignment.csv of sketch 1")->required();
    recover->add_option("--assign-b", rec_assign_b, "assignment.csv of sketch 2")->required();
    recover->add_option("--coupling", rec_coupling, "Sketch coupling.csv")->required();
    add_solver_flags(recover, recover_opt);
    recover->add_option("--norm-p", rec_norm_p, "Row-distance norm order")->capture_default_str();
    recover->add_option("--block-percentile", rec_block_percentile,
                        "Block cost entries above this quantile (1 disables)")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (match->parsed()) {
            if (!match_opt.config_path.empty()) apply_config_file(*match, match_opt.config_path);
            return run_match(match_a, match_b, match_opt, match_baseline, match_svg,
                             match_svg_threshold);
        }
        if (gwb->parsed()) {
            if (!gwb_opt.config_path.empty()) apply_config_file(*gwb, gwb_opt.config_path);
            return run_match(gwb_a, gwb_b, gwb_opt, "gw", gwb_svg, gwb_svg_threshold);
        }
        if (cover->parsed()) {
            if (!cover_opt.config_path.empty()) apply_config_file(*cover, cover_opt.config_path);
            return run_cover_stats(cover_a, cover_b, cover_opt, cover_prefix_max);
        }
        if (sketch->parsed()) {
            return run_sketch(sketch_in, sketch_opt, sketch_method, sketch_box, sketch_cube,
                              sketch_overlap);
        }
        if (recover->parsed()) {
            if (!recover_opt.config_path.empty())
                apply_config_file(*recover, recover_opt.config_path);
            return run_recover(rec_a, rec_b, recover_opt, rec_reps_a, rec_reps_b, rec_assign_a,
                               rec_assign_b, rec_coupling, rec_norm_p, rec_block_percentile);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
