#include "rgg/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "rgg/error.hpp"
#include "rgg/graph.hpp"
#include "rgg/harness.hpp"
#include "rgg/partition.hpp"
#include "rgg/sampler.hpp"
#include "rgg/theory.hpp"

namespace rgg::cli {

namespace {

struct ModelArgs {
    std::string density = "gaussian";
    int d = 2;
    double n = 0.0;
};

void add_model(CLI::App& cmd, ModelArgs& m) {
    cmd.add_option("--density", m.density, "gaussian | exponential | heavy:ALPHA | light:V[:SCALE]")
        ->capture_default_str();
    cmd.add_option("--d", m.d, "dimension")->capture_default_str();
    cmd.add_option("--n", m.n, "intensity n")->required();
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) {
        throw UsageError("cannot open " + path + " for writing");
    }
    return f;
}

ExperimentConfig single_cell(const DensitySpec& spec, double n, double r, std::optional<double> gamma,
                             std::vector<double> probes) {
    ExperimentConfig c;
    c.spec = spec;
    c.n_values = {n};
    c.r_schedules = {RSchedule{RSchedule::Kind::Fixed, r}};
    c.gamma = gamma;
    c.probes = std::move(probes);
    return c;
}

std::string gnuplot_script(const std::string& csv) {
    std::ostringstream s;
    s << "# usage: gnuplot -p <this file>\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set logscale x\n"
      << "set xlabel 'n'\n"
      << "set multiplot layout 1,2\n"
      << "set ylabel 'P(disconnected)'\n"
      << "set yrange [0:1]\n"
      << "plot '" << csv << "' using 3:6:7:8 with yerrorbars title 'empirical (Wilson 95%)', \\\n"
      << "     '' using 3:9 with points pt 7 title 'P(tail empty beyond r1)'\n"
      << "set ylabel 'isolated vertices in B(0, r0)'\n"
      << "set autoscale y\n"
      << "plot '" << csv << "' using 3:10 with linespoints title 'empirical mean', \\\n"
      << "     '' using 3:11 with linespoints title 'Mecke integral'\n"
      << "unset multiplot\n";
    return s.str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random geometric graphs on radial Poisson processes"};
    app.require_subcommand(1);

    ModelArgs model;
    double r = 1.0;
    std::optional<double> gamma;
    bool json = false;
    ClassifyOptions opts;
    std::uint64_t seed = 0;
    std::string out_path;
    std::vector<double> probes;

    auto* predict = app.add_subcommand("predict", "analytic thresholds for one (density, n, r)");
    add_model(*predict, model);
    predict->add_option("--r", r, "connection radius")->required();
    predict->add_option("--gamma", gamma, "concentration tolerance in (0, 1)");
    predict->add_flag("--json", json, "print JSON instead of a table");
    predict->add_option("--c-lo", opts.c_lo)->capture_default_str();
    predict->add_option("--c-hi", opts.c_hi)->capture_default_str();
    predict->add_option("--k-exp", opts.k_exp)->capture_default_str();

    auto* sample_cmd = app.add_subcommand("sample", "draw one point cloud as CSV plus a JSON sidecar");
    add_model(*sample_cmd, model);
    sample_cmd->add_option("--seed", seed)->capture_default_str();
    sample_cmd->add_option("--out", out_path, "CSV path; the sidecar goes to <out>.json")->required();

    auto* connectivity = app.add_subcommand("connectivity", "one trial, printed as JSON");
    add_model(*connectivity, model);
    connectivity->add_option("--r", r, "connection radius in (0, 1]")->required();
    connectivity->add_option("--seed", seed)->capture_default_str();
    connectivity->add_option("--probe", probes, "probe radii for isolated counts");
    std::string edges_path;
    connectivity->add_option("--edges", edges_path, "also write the edge list as CSV");

    auto* concentration = app.add_subcommand("concentration", "cube-partition count check on one cloud");
    add_model(*concentration, model);
    concentration->add_option("--r", r, "connection radius")->required();
    double conc_gamma = 0.5;
    concentration->add_option("--gamma", conc_gamma)->capture_default_str();
    concentration->add_option("--seed", seed)->capture_default_str();
    std::optional<double> ball_radius;
    concentration->add_option("--R", ball_radius, "partitioned ball radius (default: concentration r0)");
    std::size_t mc_samples = 100000;
    concentration->add_option("--samples", mc_samples, "Monte Carlo samples per clipped cell")->capture_default_str();

    auto* sweep = app.add_subcommand("sweep", "run a JSON experiment config");
    std::string config_path, records_path, json_path;
    std::size_t threads = 0;
    sweep->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_path, "results CSV")->required();
    sweep->add_option("--records", records_path, "per-trial records CSV");
    sweep->add_option("--json", json_path, "results and theory as JSON");
    sweep->add_option("--threads", threads, "worker threads (0: RGG_THREADS or all cores)");

    auto* report = app.add_subcommand("report", "gnuplot script for a results CSV");
    std::string results_path;
    report->add_option("--results", results_path)->required()->check(CLI::ExistingFile);
    report->add_option("--out", out_path, "script path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*predict) {
            const auto spec = DensitySpec::parse(model.d, model.density);
            const auto rep = classify(spec, model.n, r, gamma, opts);
            if (json) {
                out << to_json(rep).dump(2) << '\n';
            } else {
                out << to_table(rep);
            }
        } else if (*sample_cmd) {
            const auto spec = DensitySpec::parse(model.d, model.density);
            const auto cloud = sample(spec, model.n, seed);
            auto csv = open_out(out_path);
            write_cloud_csv(cloud, csv);
            auto sidecar = open_out(out_path + ".json");
            sidecar << cloud_sidecar_json(cloud) << '\n';
            out << cloud.size() << " points written to " << out_path << '\n';
        } else if (*connectivity) {
            const auto spec = DensitySpec::parse(model.d, model.density);
            const auto config = single_cell(spec, model.n, r, std::nullopt, probes);
            const auto plans = plan_cells(config);
            const RadialMeasure measure(spec, model.n);
            const auto rec = measure_trial(config, plans.front(), measure, seed);
            if (rec.failed) {
                throw NumericFailure(rec.error);
            }
            if (!edges_path.empty()) {
                auto cloud = std::make_shared<const PointCloud>(sample(measure, model.n, seed));
                auto f = open_out(edges_path);
                GeometricGraph::build(cloud, r).write_edge_csv(f);
            }
            auto j = to_json(rec);
            j["density"] = spec.label();
            j["dimension"] = spec.dimension();
            j["probes"] = probes;
            out << j.dump(2) << '\n';
        } else if (*concentration) {
            const auto spec = DensitySpec::parse(model.d, model.density);
            const double R =
                ball_radius ? *ball_radius : concentration_radii(spec, model.n, r, conc_gamma).r0;
            const auto partition = CubePartition::build(spec.dimension(), R, conc_gamma * r, seed);
            const auto masses = cell_masses(partition, spec, mc_samples);
            const auto cloud = sample(spec, model.n, seed);
            auto j = to_json(check_concentration(partition, masses, cloud, conc_gamma));
            j["R"] = R;
            j["side"] = partition.side();
            j["seed"] = seed;
            out << j.dump(2) << '\n';
        } else if (*sweep) {
            std::ifstream in(config_path);
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw UsageError(config_path + ": " + e.what());
            }
            const auto config = config_from_json(j);
            const auto result = rgg::run(config, RunOptions{threads});
            auto csv = open_out(out_path);
            write_results_csv(result.aggregates, csv);
            if (!records_path.empty()) {
                auto f = open_out(records_path);
                write_records_csv(result.records, f);
            }
            if (!json_path.empty()) {
                nlohmann::json doc{{"config", to_json(config)}, {"cells", nlohmann::json::array()}};
                for (std::size_t i = 0; i < result.aggregates.size(); ++i) {
                    auto cell = to_json(result.aggregates[i]);
                    cell["theory"] = to_json(result.plans[i].theory);
                    doc["cells"].push_back(std::move(cell));
                }
                auto f = open_out(json_path);
                f << doc.dump(2) << '\n';
            }
            out << result.aggregates.size() << " cells, " << result.records.size() << " trials -> " << out_path
                << '\n';
        } else if (*report) {
            const auto script = gnuplot_script(results_path);
            if (out_path.empty()) {
                out << script;
            } else {
                auto f = open_out(out_path);
                f << script;
            }
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericFailure& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "numeric failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

}  // namespace rgg::cli
