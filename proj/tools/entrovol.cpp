// entrovol: rolling sample entropy vs. volatility pipeline for daily price series.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "entrovol/error.hpp"
#include "entrovol/pipeline.hpp"

namespace {

using entrovol::pipeline::PipelineConfig;

struct Flags {
    std::string input;
    std::string out = "out";
    std::size_t width = 252;
    std::size_t step = 1;
    std::size_t m = 2;
    std::string r_mode = "rel";
    double r = 0.2;
    std::string order = "4,1,3";
    bool auto_order = false;
    std::size_t horizon = 300;
    double ratio = 0.8;
    double svr_c = 1.0;
    double svr_eps = 0.1;
    double svr_gamma = 1.0;
    std::size_t knn_k = 5;
    std::uint64_t seed = 20230410;
    bool write_r = false;
    int svg_width = 900;
    int svg_height = 420;
};

void add_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--input", f.input, "FRED CSV (ingest/all) or price CSV (rolling)");
    cmd->add_option("--out", f.out, "output directory (ENTROVOL_OUT overrides)");
    cmd->add_option("--width", f.width, "rolling window width in points")->check(CLI::Range(2, 1000000));
    cmd->add_option("--step", f.step, "rolling window shift in points")->check(CLI::Range(1, 1000000));
    cmd->add_option("--m", f.m, "SampEn embedding dimension")->check(CLI::Range(1, 100));
    cmd->add_option("--r-mode", f.r_mode, "tolerance rule: abs or rel (fraction of window std)")
        ->check(CLI::IsMember({"abs", "rel"}));
    cmd->add_option("--r", f.r, "tolerance value (absolute r or std fraction)")->check(CLI::PositiveNumber);
    cmd->add_option("--order", f.order, "ARIMA error orders p,d,q");
    cmd->add_flag("--auto-order", f.auto_order, "search p,q <= 5, d <= 1 by AICc instead of --order");
    cmd->add_option("--horizon", f.horizon, "forecast horizon in steps");
    cmd->add_option("--ratio", f.ratio, "chronological train fraction")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--svr-c", f.svr_c, "SVR box constraint")->check(CLI::PositiveNumber);
    cmd->add_option("--svr-eps", f.svr_eps, "SVR tube half-width (standardised target units)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--svr-gamma", f.svr_gamma, "SVR RBF width (standardised feature units)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--knn-k", f.knn_k, "KNN neighbour count")->check(CLI::Range(1, 1000000));
    cmd->add_option("--seed", f.seed, "seed for jittered optimiser starts");
    cmd->add_flag("--write-r", f.write_r, "add the per-window effective tolerance column to ts_sampen.csv");
    cmd->add_option("--svg-width", f.svg_width, "SVG width in px")->check(CLI::Range(200, 10000));
    cmd->add_option("--svg-height", f.svg_height, "SVG height in px")->check(CLI::Range(150, 10000));
}

PipelineConfig to_config(const Flags& f) {
    PipelineConfig c;
    c.input = f.input;
    c.out_dir = f.out;
    if (const char* env = std::getenv("ENTROVOL_OUT"); env != nullptr && *env != '\0') c.out_dir = env;
    c.rolling.width = f.width;
    c.rolling.step = f.step;
    c.sampen.m = f.m;
    c.sampen.tolerance = f.r_mode == "abs" ? entrovol::entropy::ToleranceRule::absolute(f.r)
                                           : entrovol::entropy::ToleranceRule::relative(f.r);
    unsigned p = 0, d = 0, q = 0;
    char tail = 0;
    if (std::sscanf(f.order.c_str(), "%u,%u,%u%c", &p, &d, &q, &tail) != 3) {
        throw entrovol::InvalidConfig("--order must look like p,d,q (got '" + f.order + "')");
    }
    c.order = {p, d, q, true};
    c.order.validate();
    c.auto_order = f.auto_order;
    c.horizon = f.horizon;
    c.ml.ratio = f.ratio;
    c.ml.svr.c = f.svr_c;
    c.ml.svr.epsilon = f.svr_eps;
    c.ml.svr.gamma = f.svr_gamma;
    c.ml.knn_k = f.knn_k;
    c.seed = f.seed;
    c.write_effective_r = f.write_r;
    c.svg_width = f.svg_width;
    c.svg_height = f.svg_height;
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"entrovol: sample entropy and rolling volatility of daily price series"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.set_version_flag("--version", entrovol::pipeline::kToolVersion);

    Flags flags;
    const char* names[][2] = {
        {"ingest", "parse and clean a FRED CSV"},
        {"rolling", "log returns, rolling std and rolling SampEn"},
        {"diagnose", "ADF, Ljung-Box and Pearson on the rolling series"},
        {"arimax", "regression with ARIMA errors, residual checks, forecast"},
        {"ml", "OLS / SVR / KNN comparison on a chronological split"},
        {"all", "run every stage and write a run report with a file manifest"},
    };
    for (const auto& [name, help] : names) add_flags(app.add_subcommand(name, help), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        const auto config = to_config(flags);
        const auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        nlohmann::json summary;
        if (name == "ingest") summary = entrovol::pipeline::cmd_ingest(config).summary;
        else if (name == "rolling") summary = entrovol::pipeline::cmd_rolling(config).summary;
        else if (name == "diagnose") summary = entrovol::pipeline::cmd_diagnose(config).summary;
        else if (name == "arimax") summary = entrovol::pipeline::cmd_arimax(config).summary;
        else if (name == "ml") summary = entrovol::pipeline::cmd_ml(config).summary;
        else summary = entrovol::pipeline::cmd_all(config)["manifest"];
        std::cout << summary.dump(2) << "\n";
    } catch (const entrovol::Error& e) {
        std::cerr << "entrovol: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "entrovol: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
