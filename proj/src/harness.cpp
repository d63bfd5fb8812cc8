#include "rgg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "rgg/error.hpp"
#include "rgg/graph.hpp"
#include "rgg/random.hpp"
#include "rgg/sampler.hpp"
#include "rgg/serialize.hpp"

namespace rgg {

namespace {

std::string fmt(double x, const char* spec = "%.10g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

std::string exact(double x) {
    return fmt(x, "%.17g");
}

[[noreturn]] void bad_field(const std::string& pointer, const std::string& message) {
    throw UsageError("config " + pointer + ": " + message);
}

double positive_number(const nlohmann::json& j, const std::string& pointer) {
    if (!j.is_number()) {
        bad_field(pointer, "expected a number");
    }
    const double x = j.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) {
        bad_field(pointer, "must be a finite positive number");
    }
    return x;
}

RSchedule schedule_from_json(const nlohmann::json& j, const std::string& pointer) {
    if (!j.is_object() || j.size() != 1) {
        bad_field(pointer, R"(expected one of {"fixed": r}, {"tau_multiple": c}, {"exp_multiple": c})");
    }
    const auto& [key, value] = *j.items().begin();
    RSchedule s;
    if (key == "fixed") {
        s.kind = RSchedule::Kind::Fixed;
    } else if (key == "tau_multiple") {
        s.kind = RSchedule::Kind::TauMultiple;
    } else if (key == "exp_multiple") {
        s.kind = RSchedule::Kind::ExpMultiple;
    } else {
        bad_field(pointer + "/" + key, "unknown schedule kind");
    }
    s.value = positive_number(value, pointer + "/" + key);
    return s;
}

nlohmann::json schedule_to_json(const RSchedule& s) {
    switch (s.kind) {
        case RSchedule::Kind::Fixed:
            return {{"fixed", s.value}};
        case RSchedule::Kind::TauMultiple:
            return {{"tau_multiple", s.value}};
        case RSchedule::Kind::ExpMultiple:
            return {{"exp_multiple", s.value}};
    }
    return {};
}

double scheduled_radius(const DensitySpec& spec, const RSchedule& s, double n) {
    switch (s.kind) {
        case RSchedule::Kind::Fixed:
            return s.value;
        case RSchedule::Kind::TauMultiple:
            return s.value * tau(spec, n);
        case RSchedule::Kind::ExpMultiple:
            return s.value * exp_scale(spec, n);
    }
    return s.value;
}

std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (const auto& s : items) {
        out += (out.empty() ? "" : std::string(1, sep)) + s;
    }
    return out;
}

double mean_of(std::span<const double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

}  // namespace

std::string RSchedule::label() const {
    switch (kind) {
        case Kind::Fixed:
            return "fixed:" + fmt(value);
        case Kind::TauMultiple:
            return "tau_multiple:" + fmt(value);
        case Kind::ExpMultiple:
            return "exp_multiple:" + fmt(value);
    }
    return "?";
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        bad_field("/", "expected an object");
    }
    ExperimentConfig c;
    if (!j.contains("spec")) {
        bad_field("/spec", "missing field");
    }
    try {
        c.spec = density_from_json(j.at("spec"), "/spec");
    } catch (const UsageError& e) {
        throw UsageError(std::string("config ") + e.what());
    }

    if (!j.contains("n_values") || !j.at("n_values").is_array() || j.at("n_values").empty()) {
        bad_field("/n_values", "expected a non-empty array of intensities");
    }
    for (std::size_t i = 0; i < j.at("n_values").size(); ++i) {
        c.n_values.push_back(positive_number(j.at("n_values")[i], "/n_values/" + std::to_string(i)));
    }

    if (!j.contains("r_schedule")) {
        bad_field("/r_schedule", "missing field");
    }
    const auto& sched = j.at("r_schedule");
    if (sched.is_array()) {
        if (sched.empty()) {
            bad_field("/r_schedule", "empty schedule list");
        }
        for (std::size_t i = 0; i < sched.size(); ++i) {
            c.r_schedules.push_back(schedule_from_json(sched[i], "/r_schedule/" + std::to_string(i)));
        }
    } else {
        c.r_schedules.push_back(schedule_from_json(sched, "/r_schedule"));
    }
    for (std::size_t i = 0; i < c.r_schedules.size(); ++i) {
        const auto kind = c.r_schedules[i].kind;
        const std::string where = sched.is_array() ? "/r_schedule/" + std::to_string(i) : "/r_schedule";
        if (kind == RSchedule::Kind::TauMultiple && c.spec.tail_class() != TailClass::Superexponential) {
            bad_field(where, "tau_multiple needs a superexponential density (v > 1)");
        }
        if (kind == RSchedule::Kind::ExpMultiple && !c.spec.is_light()) {
            bad_field(where, "exp_multiple needs a light-tailed density");
        }
        if (kind != RSchedule::Kind::Fixed || c.spec.is_light()) {
            for (std::size_t k = 0; k < c.n_values.size(); ++k) {
                if (c.n_values[k] < 16.0) {
                    bad_field("/n_values/" + std::to_string(k), "light-tail thresholds need n >= 16");
                }
            }
        }
    }

    if (j.contains("gamma") && !j.at("gamma").is_null()) {
        const double g = positive_number(j.at("gamma"), "/gamma");
        if (!(g < 1.0)) {
            bad_field("/gamma", "must lie in (0, 1)");
        }
        c.gamma = g;
    }
    if (j.contains("trials")) {
        if (!j.at("trials").is_number_integer() || j.at("trials").get<long long>() < 1) {
            bad_field("/trials", "expected an integer >= 1");
        }
        c.trials = j.at("trials").get<std::size_t>();
    }
    if (j.contains("master_seed")) {
        if (!j.at("master_seed").is_number_unsigned() && !j.at("master_seed").is_number_integer()) {
            bad_field("/master_seed", "expected an unsigned 64-bit integer");
        }
        if (j.at("master_seed").is_number_integer() && j.at("master_seed").get<long long>() < 0) {
            bad_field("/master_seed", "expected an unsigned 64-bit integer");
        }
        c.master_seed = j.at("master_seed").get<std::uint64_t>();
    }
    if (j.contains("probes")) {
        if (!j.at("probes").is_array()) {
            bad_field("/probes", "expected an array of radii");
        }
        for (std::size_t i = 0; i < j.at("probes").size(); ++i) {
            const auto& p = j.at("probes")[i];
            const std::string where = "/probes/" + std::to_string(i);
            if (!p.is_number() || !(p.get<double>() >= 0.0)) {
                bad_field(where, "expected a non-negative number");
            }
            c.probes.push_back(p.get<double>());
        }
    }
    if (j.contains("classify")) {
        const auto& o = j.at("classify");
        if (!o.is_object()) {
            bad_field("/classify", "expected an object");
        }
        if (o.contains("c_lo")) c.classify.c_lo = positive_number(o.at("c_lo"), "/classify/c_lo");
        if (o.contains("c_hi")) c.classify.c_hi = positive_number(o.at("c_hi"), "/classify/c_hi");
        if (o.contains("k_exp")) c.classify.k_exp = positive_number(o.at("k_exp"), "/classify/k_exp");
    }
    return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["spec"] = c.spec;
    j["n_values"] = c.n_values;
    if (c.r_schedules.size() == 1) {
        j["r_schedule"] = schedule_to_json(c.r_schedules.front());
    } else {
        j["r_schedule"] = nlohmann::json::array();
        for (const auto& s : c.r_schedules) {
            j["r_schedule"].push_back(schedule_to_json(s));
        }
    }
    j["gamma"] = c.gamma ? nlohmann::json(*c.gamma) : nlohmann::json(nullptr);
    j["trials"] = c.trials;
    j["master_seed"] = c.master_seed;
    j["probes"] = c.probes;
    j["classify"] = {{"c_lo", c.classify.c_lo}, {"c_hi", c.classify.c_hi}, {"k_exp", c.classify.k_exp}};
    return j;
}

Proportion wilson(std::size_t successes, std::size_t trials) {
    Proportion out{successes, trials, 0.0, 0.0, 1.0};
    if (trials == 0) {
        return out;
    }
    constexpr double z = 1.959963984540054;
    const double t = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / t;
    const double denom = 1.0 + z * z / t;
    const double centre = (p + z * z / (2.0 * t)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / t + z * z / (4.0 * t * t)) / denom;
    out.p = p;
    out.ci_lo = std::max(0.0, centre - half);
    out.ci_hi = std::min(1.0, centre + half);
    return out;
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    const std::size_t hardware = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RGG_THREADS")) {
        char* end = nullptr;
        const long long cap = std::strtoll(env, &end, 10);
        if (end != env && cap > 0) {
            return static_cast<std::size_t>(cap);
        }
    }
    return hardware;
}

std::vector<CellPlan> plan_cells(const ExperimentConfig& config) {
    std::vector<CellPlan> plans;
    for (const auto& schedule : config.r_schedules) {
        double previous_r = std::numeric_limits<double>::infinity();
        for (double n : config.n_values) {
            CellPlan p;
            p.index = plans.size();
            p.n = n;
            p.schedule = schedule;
            p.r_requested = scheduled_radius(config.spec, schedule, n);
            p.clipped = p.r_requested > 1.0;
            p.r = std::min(p.r_requested, 1.0);
            if (p.clipped) {
                p.flags.emplace_back("Clipped");
            }
            if (p.r_requested > previous_r) {
                p.flags.emplace_back("IncreasingRadius");
            }
            previous_r = p.r_requested;
            p.theory = classify(config.spec, n, p.r, config.gamma, config.classify);
            for (const auto& f : p.theory.flags) {
                p.flags.push_back(f);
            }
            if (config.gamma && config.spec.tail_class() == TailClass::Superexponential) {
                const auto radii = concentration_radii(config.spec, n, p.r, *config.gamma);
                try {
                    if (!(radii.r0 > 0.0)) {
                        throw InsufficientResolution("empty concentration ball");
                    }
                    p.partition = CubePartition::build(config.spec.dimension(), radii.r0, *config.gamma * p.r,
                                                       child_seed(config.master_seed ^ 0xc0ffeeULL, p.index));
                    p.masses = cell_masses(*p.partition, config.spec);
                } catch (const InsufficientResolution&) {
                    p.flags.emplace_back("NoConcentrationCells");
                }
            }
            plans.push_back(std::move(p));
        }
    }
    return plans;
}

TrialRecord run_trial(const ExperimentConfig& config, const CellPlan& plan, const RadialMeasure& measure,
                      std::size_t trial) {
    auto rec = measure_trial(config, plan, measure, child_seed(child_seed(config.master_seed, plan.index), trial));
    rec.trial = trial;
    return rec;
}

TrialRecord measure_trial(const ExperimentConfig& config, const CellPlan& plan, const RadialMeasure& measure,
                          std::uint64_t seed) {
    TrialRecord rec;
    rec.cell = plan.index;
    rec.n = plan.n;
    rec.r = plan.r;
    rec.seed = seed;
    try {
        auto cloud = std::make_shared<const PointCloud>(sample(measure, plan.n, rec.seed));
        const auto graph = GeometricGraph::build(cloud, plan.r);
        std::vector<double> probes = config.probes;
        probes.push_back(plan.theory.r0);
        const auto st = stats(graph, probes);
        rec.point_count = cloud->size();
        rec.num_components = st.num_components;
        rec.is_connected = st.is_connected;
        rec.r_c = st.r_c;
        rec.r_max = st.r_max;
        for (std::size_t i = 0; i < config.probes.size(); ++i) {
            rec.isolated_counts.push_back(st.isolated_within[i].second);
        }
        rec.isolated_at_r0 = st.isolated_within.back().second;
        for (std::size_t v = 0; v < cloud->size(); ++v) {
            const double norm = cloud->norm(v);
            rec.tail_points_beyond_r0 += norm > plan.theory.r0 ? 1 : 0;
            rec.tail_points_beyond_r1 += norm > plan.theory.r1 ? 1 : 0;
        }
        if (plan.partition && plan.masses) {
            const auto report = check_concentration(*plan.partition, *plan.masses, *cloud, *config.gamma);
            rec.concentration_violations = report.violations.size();
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

std::vector<CellAggregate> aggregate(const ExperimentConfig& config, const std::vector<CellPlan>& plans,
                                     const std::vector<TrialRecord>& records) {
    std::vector<const TrialRecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) {
        sorted.push_back(&r);
    }
    std::sort(sorted.begin(), sorted.end(), [](const TrialRecord* a, const TrialRecord* b) {
        return a->cell != b->cell ? a->cell < b->cell : a->trial < b->trial;
    });

    std::vector<CellAggregate> out;
    auto it = sorted.begin();
    for (const auto& plan : plans) {
        CellAggregate a;
        a.density = config.spec.label();
        a.dimension = config.spec.dimension();
        a.n = plan.n;
        a.schedule = plan.schedule.label();
        a.r_requested = plan.r_requested;
        a.r = plan.r;
        a.clipped = plan.clipped;
        a.expected_isolated = plan.theory.expected_isolated;
        a.tail_empty_theory = plan.theory.tail_empty_prob;
        a.prediction = to_string(plan.theory.prediction);
        a.flags = plan.flags;

        std::size_t disconnected = 0, rc_below = 0, empty_r1 = 0, empty_r0 = 0, any_violation = 0, ok = 0;
        std::vector<double> isolated_r0;
        std::vector<std::vector<double>> per_probe(config.probes.size());
        std::vector<double> violations;
        for (; it != sorted.end() && (*it)->cell == plan.index; ++it) {
            const auto& rec = **it;
            if (rec.failed) {
                ++a.failed;
                continue;
            }
            ++ok;
            disconnected += rec.is_connected ? 0 : 1;
            rc_below += rec.r_c < rec.r_max ? 1 : 0;
            empty_r1 += rec.tail_points_beyond_r1 == 0 ? 1 : 0;
            empty_r0 += rec.tail_points_beyond_r0 == 0 ? 1 : 0;
            isolated_r0.push_back(static_cast<double>(rec.isolated_at_r0));
            for (std::size_t p = 0; p < per_probe.size() && p < rec.isolated_counts.size(); ++p) {
                per_probe[p].push_back(static_cast<double>(rec.isolated_counts[p]));
            }
            if (rec.concentration_violations) {
                violations.push_back(static_cast<double>(*rec.concentration_violations));
                any_violation += *rec.concentration_violations > 0 ? 1 : 0;
            }
        }
        a.trials = ok;
        a.disconnected = wilson(disconnected, ok);
        a.rc_below_rmax = wilson(rc_below, ok);
        a.tail_empty = wilson(empty_r1, ok);
        a.tail_empty_r0 = wilson(empty_r0, ok);
        a.mean_isolated = mean_of(isolated_r0);
        for (const auto& xs : per_probe) {
            a.mean_isolated_per_probe.push_back(mean_of(xs));
        }
        if (plan.partition && plan.masses) {
            a.mean_concentration_violations = mean_of(violations);
            a.any_concentration_violation = wilson(any_violation, violations.size());
            double budget = 0.0;
            for (double nu : plan.masses->nu) {
                const double g = *config.gamma;
                budget += 2.0 * std::exp(-plan.n * nu * g * g / 3.0);
            }
            a.chernoff_budget = budget;
        }
        out.push_back(std::move(a));
    }
    return out;
}

RunResult run(const ExperimentConfig& config, RunOptions options) {
    RunResult result;
    result.plans = plan_cells(config);
    const double max_n = *std::max_element(config.n_values.begin(), config.n_values.end());
    const RadialMeasure measure(config.spec, max_n);

    const std::size_t jobs = result.plans.size() * config.trials;
    result.records.resize(jobs);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            const auto& plan = result.plans[job / config.trials];
            result.records[job] = run_trial(config, plan, measure, job % config.trials);
        }
    };
    const std::size_t threads = std::min(resolve_threads(options.threads), std::max<std::size_t>(jobs, 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    std::size_t failed = 0;
    std::string first_error;
    for (const auto& rec : result.records) {
        if (rec.failed) {
            if (failed++ == 0) {
                first_error = rec.error;
            }
        }
    }
    if (static_cast<double>(failed) > 0.01 * static_cast<double>(jobs)) {
        throw NumericFailure(std::to_string(failed) + " of " + std::to_string(jobs) +
                             " trials failed; first error: " + first_error);
    }
    result.aggregates = aggregate(config, result.plans, result.records);
    return result;
}

void write_results_csv(const std::vector<CellAggregate>& aggregates, std::ostream& out) {
    out << "density,d,n,r,trials,p_disconnected,ci_lo,ci_hi,p_tail_empty,mean_isolated,expected_isolated,prediction\n";
    for (const auto& a : aggregates) {
        out << a.density << ',' << a.dimension << ',' << fmt(a.n) << ',' << fmt(a.r) << ',' << a.trials << ','
            << fmt(a.disconnected.p) << ',' << fmt(a.disconnected.ci_lo) << ',' << fmt(a.disconnected.ci_hi) << ','
            << fmt(a.tail_empty.p) << ',' << fmt(a.mean_isolated) << ',' << fmt(a.expected_isolated) << ','
            << a.prediction << '\n';
    }
}

namespace {

nlohmann::json proportion_json(const Proportion& p) {
    return {{"successes", p.successes}, {"trials", p.trials}, {"p", p.p}, {"ci_lo", p.ci_lo}, {"ci_hi", p.ci_hi}};
}

}  // namespace

nlohmann::json to_json(const CellAggregate& a) {
    nlohmann::json j{{"density", a.density},
                     {"d", a.dimension},
                     {"n", a.n},
                     {"schedule", a.schedule},
                     {"r_requested", a.r_requested},
                     {"r", a.r},
                     {"clipped", a.clipped},
                     {"trials", a.trials},
                     {"failed", a.failed},
                     {"p_disconnected", a.disconnected.p},
                     {"ci_lo", a.disconnected.ci_lo},
                     {"ci_hi", a.disconnected.ci_hi},
                     {"p_tail_empty", a.tail_empty.p},
                     {"mean_isolated", a.mean_isolated},
                     {"expected_isolated", a.expected_isolated},
                     {"prediction", a.prediction},
                     {"disconnected", proportion_json(a.disconnected)},
                     {"rc_below_rmax", proportion_json(a.rc_below_rmax)},
                     {"tail_empty_r1", proportion_json(a.tail_empty)},
                     {"tail_empty_r0", proportion_json(a.tail_empty_r0)},
                     {"tail_empty_theory", a.tail_empty_theory},
                     {"mean_isolated_per_probe", a.mean_isolated_per_probe},
                     {"flags", a.flags}};
    if (a.mean_concentration_violations) {
        j["mean_concentration_violations"] = *a.mean_concentration_violations;
        j["any_concentration_violation"] = proportion_json(*a.any_concentration_violation);
        j["chernoff_budget"] = *a.chernoff_budget;
    }
    return j;
}

nlohmann::json to_json(const TrialRecord& r) {
    nlohmann::json j{{"cell", r.cell},
                     {"trial", r.trial},
                     {"n", r.n},
                     {"r", r.r},
                     {"seed", r.seed},
                     {"point_count", r.point_count},
                     {"num_components", r.num_components},
                     {"is_connected", r.is_connected},
                     {"r_c", r.r_c},
                     {"r_max", r.r_max},
                     {"isolated_counts", r.isolated_counts},
                     {"isolated_at_r0", r.isolated_at_r0},
                     {"tail_points_beyond_r0", r.tail_points_beyond_r0},
                     {"tail_points_beyond_r1", r.tail_points_beyond_r1},
                     {"failed", r.failed}};
    j["concentration_violations"] =
        r.concentration_violations ? nlohmann::json(*r.concentration_violations) : nlohmann::json(nullptr);
    if (r.failed) {
        j["error"] = r.error;
    }
    return j;
}

void write_records_csv(const std::vector<TrialRecord>& records, std::ostream& out) {
    out << "cell,trial,n,r,seed,point_count,num_components,is_connected,r_c,r_max,isolated_at_r0,"
           "tail_points_beyond_r0,tail_points_beyond_r1,concentration_violations,failed,isolated_counts,error\n";
    for (const auto& r : records) {
        std::vector<std::string> counts;
        for (auto c : r.isolated_counts) {
            counts.push_back(std::to_string(c));
        }
        std::string error = r.error;
        std::replace_if(error.begin(), error.end(), [](char ch) { return ch == ',' || ch == '\n' || ch == '\r'; }, ' ');
        out << r.cell << ',' << r.trial << ',' << exact(r.n) << ',' << exact(r.r) << ',' << r.seed << ','
            << r.point_count << ',' << r.num_components << ',' << (r.is_connected ? 1 : 0) << ',' << exact(r.r_c)
            << ',' << exact(r.r_max) << ',' << r.isolated_at_r0 << ',' << r.tail_points_beyond_r0 << ','
            << r.tail_points_beyond_r1 << ','
            << (r.concentration_violations ? std::to_string(*r.concentration_violations) : std::string()) << ','
            << (r.failed ? 1 : 0) << ',' << join(counts, ';') << ',' << error << '\n';
    }
}

std::vector<TrialRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw UsageError("records CSV is empty");
    }
    std::vector<TrialRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            f.push_back(cell);
        }
        if (!line.empty() && line.back() == ',') {
            f.emplace_back();
        }
        if (f.size() != 17) {
            throw UsageError("records CSV line " + std::to_string(line_no) + ": expected 17 fields");
        }
        TrialRecord r;
        try {
            r.cell = std::stoull(f[0]);
            r.trial = std::stoull(f[1]);
            r.n = std::stod(f[2]);
            r.r = std::stod(f[3]);
            r.seed = std::stoull(f[4]);
            r.point_count = std::stoull(f[5]);
            r.num_components = std::stoull(f[6]);
            r.is_connected = f[7] == "1";
            r.r_c = std::stod(f[8]);
            r.r_max = std::stod(f[9]);
            r.isolated_at_r0 = std::stoull(f[10]);
            r.tail_points_beyond_r0 = std::stoull(f[11]);
            r.tail_points_beyond_r1 = std::stoull(f[12]);
            if (!f[13].empty()) {
                r.concentration_violations = std::stoull(f[13]);
            }
            r.failed = f[14] == "1";
            std::stringstream counts(f[15]);
            std::string c;
            while (std::getline(counts, c, ';')) {
                r.isolated_counts.push_back(std::stoull(c));
            }
            r.error = f[16];
        } catch (const std::logic_error&) {
            throw UsageError("records CSV line " + std::to_string(line_no) + ": malformed field");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace rgg
