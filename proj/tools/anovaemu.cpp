#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "anovaemu/common.hpp"
#include "anovaemu/db_anova.hpp"
#include "anovaemu/df_emulator.hpp"
#include "anovaemu/heat_pde.hpp"
#include "anovaemu/testbed.hpp"

namespace {

using namespace anovaemu;

struct CommonOpts {
    int n = 0;  // 0 = per-command default
    std::uint64_t seed = 2025;
    int d0 = 0;  // 0 = per-function default
    double eps = 0.05;
    double tau = 1.0;  // < 1 enables the mixture base law
    int workers = static_cast<int>(std::thread::hardware_concurrency());
    std::string out = ".";
    bool plot_data = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--n", o.n, "Sample size N (0 = command default)");
    cmd->add_option("--seed", o.seed, "Random seed")->envname("ANOVAEMU_SEED");
    cmd->add_option("--d0", o.d0, "Truncation order override (0 = function default)");
    cmd->add_option("--eps", o.eps, "Truncation-order tolerance")->check(CLI::PositiveNumber);
    cmd->add_option("--tau", o.tau, "Mixture weight for the base law (1 = no mixture)")
        ->check(CLI::Range(0.5, 1.0));
    cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_flag("--plot-data", o.plot_data, "Also write (observation, prediction) pairs");
}

struct Problem {
    DerivativeModel model;
    std::vector<MarginalPtr> marginals;
    int default_d0 = 1;
    ComponentSelection selection;      // derivative-free emulator structure
    std::vector<Subset> db_components; // derivative-based emulator structure
    bool with_total = true;
    int default_screen_n = 8192;
};

std::vector<int> all_inputs(int d) {
    std::vector<int> v(d);
    for (int j = 0; j < d; ++j) v[j] = j;
    return v;
}

Problem make_problem(const std::string& name) {
    Problem p;
    if (name == "ishigami") {
        p.model = ishigami_model();
        p.marginals = ishigami_marginals();
        p.default_d0 = 2;
        p.selection = {ComponentSelection::Mode::custom, {}, ishigami_components()};
        p.db_components = ishigami_components();
        p.default_screen_n = 1 << 14;
    } else if (name == "gfunction-a") {
        p.model = g_function_model(g_a_type_a());
        p.marginals = g_function_marginals(10);
        p.default_d0 = 2;
        p.selection = {ComponentSelection::Mode::influential, {0, 1}, {}};
        p.db_components = all_subsets_up_to({0, 1}, 2);
    } else if (name == "gfunction-b") {
        p.model = g_function_model(g_a_type_b());
        p.marginals = g_function_marginals(10);
        p.default_d0 = 1;
        p.db_components = all_subsets_up_to(all_inputs(10), 1);
    } else if (name == "gfunction-c") {
        p.model = g_function_model(g_a_type_c());
        p.marginals = g_function_marginals(10);
        p.default_d0 = 4;
        p.db_components = all_subsets_up_to(all_inputs(10), 4);
    } else if (name == "heat-pde") {
        const PdeConfig cfg;
        p.model = heat_qoi_model(cfg);
        p.marginals = pde_input_marginals(cfg);
        p.default_d0 = 1;
        p.db_components = all_subsets_up_to(all_inputs(cfg.cells), 1);
        p.with_total = false;  // pick-freeze totals double the adjoint solves
        p.default_screen_n = 1000;
    } else {
        throw CLI::ValidationError("function", "unsupported function '" + name + "'");
    }
    return p;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot write " + path.string());
    os << text;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("cannot read " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                numeric = false;  // header line
                break;
            }
        }
        if (numeric && !row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument(path + ": no numeric rows");
    Eigen::MatrixXd m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::invalid_argument(path + ": ragged rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

std::string csv_pairs(const Eigen::VectorXd& truth, const Eigen::VectorXd& pred,
                      const Eigen::VectorXd* pred2) {
    std::ostringstream os;
    os.precision(12);
    os << "observation,prediction";
    if (pred2) os << ",prediction_mixture";
    os << "\n";
    for (int i = 0; i < truth.size(); ++i) {
        os << truth[i] << "," << pred[i];
        if (pred2) os << "," << (*pred2)[i];
        os << "\n";
    }
    return os.str();
}

nlohmann::json metrics_json(const Metrics& m) {
    return {{"r2", m.r2}, {"rmse", m.rmse}, {"max_abs_err", m.max_abs_err}};
}

int cmd_screen(const std::string& fn, const CommonOpts& o) {
    Problem p = make_problem(fn);
    const int n = o.n > 0 ? o.n : p.default_screen_n;
    ReportOptions ro;
    ro.with_total = p.with_total;
    ro.eps = o.eps;
    ro.workers = o.workers;
    const SensitivityReport rep = sensitivity_report(p.model, p.marginals, n, o.seed, ro);

    const std::filesystem::path dir(o.out);
    write_file(dir / ("screen-" + fn + ".csv"), rep.to_csv());
    write_file(dir / ("screen-" + fn + ".json"), rep.to_json().dump(2) + "\n");

    std::cout << rep.to_csv();
    std::cout << "sum_S=" << rep.s.sum();
    if (rep.st.size() > 0) std::cout << " sum_ST=" << rep.st.sum();
    std::cout << "\nrecommended_d0=" << rep.recommended_d0
              << " retained_components=" << rep.retained.size() << "\n";
    for (const auto& d : rep.decisions) std::cout << "decision: " << d << "\n";
    return 0;
}

int cmd_fit_predict(const std::string& fn, const CommonOpts& o, bool db_path,
                    const std::string& table, const std::string& predict_at, int d_ext) {
    const int n = o.n > 0 ? o.n : 500;
    const int n_test = 500;
    const std::filesystem::path dir(o.out);

    if (fn == "external-table") {
        if (table.empty())
            throw CLI::ValidationError("--table", "external-table requires --table");
        if (d_ext < 1) throw CLI::ValidationError("--d", "external-table requires --d >= 1");
        std::vector<MarginalPtr> base;
        for (int j = 0; j < d_ext; ++j) base.push_back(uniform_marginal(0.0, 1.0));
        const int d0 = o.d0 > 0 ? o.d0 : 1;
        EmulatorSpec spec = default_spec(base, d0, rho_min_of(base), n);
        const EvaluationPlan plan = plan_design(spec, n, o.seed);
        Eigen::MatrixXd y = read_csv_matrix(table);
        if (y.cols() == 1 && y.rows() == static_cast<Eigen::Index>(n) * plan.l())
            y = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>(y.data(), n, plan.l());
        const DfEmulator em = fit_df(plan, Eigen::MatrixXd(y), spec);
        if (!predict_at.empty()) {
            const Eigen::MatrixXd x = read_csv_matrix(predict_at);
            const Eigen::VectorXd pred = predict_df_batch(em, x);
            std::ostringstream os;
            os.precision(12);
            os << "prediction\n";
            for (int i = 0; i < pred.size(); ++i) os << pred[i] << "\n";
            write_file(dir / "predictions-external-table.csv", os.str());
            std::cout << "predictions=" << pred.size() << "\n";
        }
        std::ostringstream arc;
        save_df(em, arc);
        write_file(dir / "emulator-external-table.json", arc.str());
        return 0;
    }

    Problem p = make_problem(fn);
    if (db_path && o.tau < 1.0)
        throw CLI::ValidationError("--tau", "mixture base laws apply to the derivative-free path");
    const int d0 = o.d0 > 0 ? o.d0 : p.default_d0;
    ComponentSelection sel =
        o.d0 > 0 ? ComponentSelection{} : p.selection;  // override resets to full mode

    const Eigen::MatrixXd xtest =
        sample_design(p.marginals, n_test, o.seed, Generator::sobol, n).points;
    Eigen::VectorXd truth(n_test);
    for (int i = 0; i < n_test; ++i) truth[i] = p.model.value(xtest.row(i).transpose());

    Eigen::VectorXd pred;
    Eigen::VectorXd pred_mix;
    bool has_mix = false;
    if (db_path) {
        const DbEmulator em =
            fit_db(p.model, p.marginals, n, o.seed, p.db_components, Generator::sobol, o.workers);
        pred = predict_db_batch(em, xtest);
    } else {
        const EmulatorSpec spec =
            default_spec(p.marginals, d0, rho_min_of(p.marginals), n, sel);
        const DfEmulator em =
            fit_df_model(p.model.value, spec, n, o.seed, Generator::sobol, o.workers);
        pred = predict_df_batch(em, xtest);
        if (o.tau < 1.0) {
            std::vector<MarginalPtr> mixed;
            for (const auto& m : p.marginals) mixed.push_back(make_default_mixture(m, o.tau));
            const EmulatorSpec mspec = default_spec(mixed, d0, rho_min_of(mixed), n, sel);
            const DfEmulator mem =
                fit_df_model(p.model.value, mspec, n, o.seed, Generator::sobol, o.workers);
            pred_mix = predict_df_batch(mem, xtest);
            has_mix = true;
        }
    }

    const Metrics m = compute_metrics(truth, pred);
    nlohmann::json mj;
    mj["metrics"] = metrics_json(m);
    std::cout << "r2=" << m.r2 << " rmse=" << m.rmse << " max_abs_err=" << m.max_abs_err << "\n";
    if (has_mix) {
        const Metrics mm = compute_metrics(truth, pred_mix);
        mj["metrics_mixture"] = metrics_json(mm);
        std::cout << "mixture: r2=" << mm.r2 << " rmse=" << mm.rmse << "\n";
    }
    write_file(dir / ("predictions-" + fn + ".csv"),
               csv_pairs(truth, pred, has_mix ? &pred_mix : nullptr));
    write_file(dir / ("metrics-" + fn + ".json"), mj.dump(2) + "\n");
    if (o.plot_data)
        write_file(dir / ("plot-" + fn + ".csv"), csv_pairs(truth, pred, nullptr));
    return 0;
}

int cmd_benchmark(const std::string& study, const CommonOpts& o, int replications,
                  std::vector<int> ns) {
    if (ns.empty()) ns = {250, 1000, 4000};
    const int n_test = 64;
    RateStudy result;
    if (study == "db-ishigami") {
        result = db_rate_study(ishigami_model(), ishigami_marginals(),
                               all_subsets_up_to(all_inputs(3), 3), ns, replications, n_test,
                               o.seed, o.workers);
    } else if (study == "db-linear") {
        Eigen::VectorXd c(5);
        c << 1, 2, 3, 4, 5;
        std::vector<MarginalPtr> base;
        for (int j = 0; j < 5; ++j) base.push_back(uniform_marginal(0.0, 1.0));
        result = db_rate_study(linear_model(c), base, all_subsets_up_to(all_inputs(5), 1), ns,
                               replications, n_test, o.seed, o.workers);
    } else if (study == "df-additive") {
        const DerivativeModel model = additive_exp_model(5);
        result = df_rate_study(model.value, additive_exp_marginals(5), 1, ns, replications,
                               n_test, o.seed, o.workers);
    } else {
        throw CLI::ValidationError("study", "unsupported study '" + study + "'");
    }
    write_file(std::filesystem::path(o.out) / ("benchmark-" + study + ".csv"),
               rate_csv(result));
    std::cout << rate_csv(result);
    std::cout << "slope=" << result.slope << "\n";
    return 0;
}

int cmd_pde_demo(const CommonOpts& o, int cells) {
    // Gradient validation on a small grid: adjoint vs central differences.
    PdeConfig small;
    small.cells = 10;
    std::mt19937_64 gen(o.seed);
    Eigen::VectorXd z(small.cells);
    const auto small_marg = pde_input_marginals(small);
    for (int j = 0; j < small.cells; ++j) z[j] = small_marg[j]->quantile(uniform01(gen));
    const Eigen::VectorXd grad = qoi_gradient(small, z);
    double max_rel = 0.0;
    const double eps_fd = 1e-4;
    for (int j = 0; j < small.cells; ++j) {
        Eigen::VectorXd zp = z, zm = z;
        zp[j] += eps_fd;
        zm[j] -= eps_fd;
        const double fd = (qoi(solve_forward(small, zp)) - qoi(solve_forward(small, zm))) /
                          (2.0 * eps_fd);
        max_rel = std::max(max_rel, std::abs(fd - grad[j]) /
                                        std::max(1e-12, std::abs(grad[j])));
    }
    std::cout << "gradient_fd_max_rel_err=" << max_rel << "\n";

    // Screening of the full-size problem.
    PdeConfig cfg;
    cfg.cells = cells;
    const DerivativeModel model = heat_qoi_model(cfg);
    const auto marg = pde_input_marginals(cfg);
    const int n = o.n > 0 ? o.n : 1000;
    ReportOptions ro;
    ro.with_total = false;
    ro.eps = o.eps;
    ro.workers = o.workers;
    const SensitivityReport rep = sensitivity_report(model, marg, n, o.seed, ro);
    int important = 0;
    for (int j = 0; j < rep.ub.size(); ++j)
        if (rep.ub[j] > 0.01) ++important;
    std::cout << "sum_S=" << rep.s.sum() << " recommended_d0=" << rep.recommended_d0
              << " components_ub_gt_0.01=" << important << "\n";
    const std::filesystem::path dir(o.out);
    write_file(dir / "pde-screen.csv", rep.to_csv());
    write_file(dir / "pde-screen.json", rep.to_json().dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ANOVA-based emulators: screening, fitting, prediction and benchmarks"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Configuration file (key = value, sectioned)");
    bool dump_config = false;
    app.add_flag("--dump-config", dump_config, "Print the fully resolved configuration");

    CommonOpts screen_o, fit_o, bench_o, pde_o;
    std::string screen_fn, fit_fn, bench_study;
    bool db_path = false;
    std::string table, predict_at;
    int d_ext = 0, replications = 50, pde_cells = 50;
    std::vector<int> bench_ns;

    CLI::App* screen = app.add_subcommand("screen", "Derivative-based sensitivity screening");
    screen->add_option("function", screen_fn,
                       "ishigami | gfunction-a | gfunction-b | gfunction-c | heat-pde")
        ->required();
    add_common(screen, screen_o);

    CLI::App* fit = app.add_subcommand("fit-predict", "Fit an emulator and predict held-out points");
    fit->add_option("function", fit_fn,
                    "ishigami | gfunction-a | gfunction-b | gfunction-c | heat-pde | external-table")
        ->required();
    add_common(fit, fit_o);
    fit->add_flag("--db", db_path, "Use the derivative-based emulator");
    fit->add_option("--table", table, "CSV of model outputs for external-table (N x L)");
    fit->add_option("--predict-at", predict_at, "CSV of points to predict for external-table");
    fit->add_option("--d", d_ext, "Input dimension for external-table");

    CLI::App* bench = app.add_subcommand("benchmark", "Convergence-rate replication studies");
    bench->add_option("study", bench_study, "db-ishigami | db-linear | df-additive")->required();
    add_common(bench, bench_o);
    bench->add_option("--r", replications, "Replications per sample size")
        ->check(CLI::PositiveNumber);
    bench->add_option("--ns", bench_ns, "Sample sizes (default 250 1000 4000)");

    CLI::App* pde = app.add_subcommand("pde-demo", "Heat-equation gradient check and screening");
    add_common(pde, pde_o);
    pde->add_option("--cells", pde_cells, "Interior cells for the screening run")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (dump_config) {
        std::cout << app.config_to_str(true, true);
        return 0;
    }

    try {
        if (screen->parsed()) return cmd_screen(screen_fn, screen_o);
        if (fit->parsed()) return cmd_fit_predict(fit_fn, fit_o, db_path, table, predict_at, d_ext);
        if (bench->parsed()) return cmd_benchmark(bench_study, bench_o, replications, bench_ns);
        if (pde->parsed()) return cmd_pde_demo(pde_o, pde_cells);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
