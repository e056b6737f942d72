#include "entrovol/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "entrovol/error.hpp"
#include "entrovol/ingest.hpp"
#include "entrovol/io.hpp"
#include "entrovol/stats.hpp"
#include "entrovol/svg.hpp"

namespace entrovol::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPricesFile = "prices_clean.csv";
constexpr const char* kStdFile = "ts_std.csv";
constexpr const char* kSampEnFile = "ts_sampen.csv";

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

json with_schema(json j) {
    j["schema_version"] = kSchemaVersion;
    return j;
}

fs::path ensure_out(const PipelineConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec) throw IoFailure("cannot create output directory " + config.out_dir.string() + ": " + ec.message());
    return config.out_dir;
}

void require_file(const fs::path& p) {
    if (!fs::exists(p)) throw IoFailure("input file not found: " + p.string());
}

ingest::CleanedSeries load_prices(const fs::path& path) {
    require_file(path);
    const auto table = ingest::parse_fred_csv(io::read_text_file(path));
    return ingest::clean_series(table.rows, table.series_id);
}

struct RollingPair {
    series::RollingSeries std_series;
    series::RollingSeries sampen;
};

RollingPair load_rolling(const PipelineConfig& config) {
    const auto dir = config.out_dir;
    require_file(dir / kStdFile);
    require_file(dir / kSampEnFile);
    return {read_rolling_csv(dir / kStdFile), read_rolling_csv(dir / kSampEnFile)};
}

std::vector<double> days_of(const std::vector<Date>& dates) {
    std::vector<double> out(dates.size());
    for (std::size_t i = 0; i < dates.size(); ++i) out[i] = static_cast<double>(dates[i].days_since_epoch());
    return out;
}

std::vector<double> days_of(const series::RollingSeries& s) {
    std::vector<double> out(s.points.size());
    for (std::size_t i = 0; i < s.points.size(); ++i) out[i] = static_cast<double>(s.points[i].date.days_since_epoch());
    return out;
}

std::vector<double> values_of(const series::RollingSeries& s) {
    std::vector<double> out(s.points.size());
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        out[i] = s.points[i].defined ? s.points[i].value : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

json metrics_json(const ml::Metrics& m) {
    return {{"mae", num(m.mae)}, {"mape_percent", num(m.mape_percent)}, {"mse", num(m.mse)}, {"rmse", num(m.rmse)}};
}

json fit_json(const arimax::ArimaxFit& fit) {
    json coefs = json::array();
    for (std::size_t i = 0; i < fit.coef_names.size(); ++i) {
        coefs.push_back({{"name", fit.coef_names[i]}, {"estimate", num(fit.coef[i])}, {"se", num(fit.se[i])}});
    }
    json phi = json::array(), theta = json::array();
    for (double v : fit.phi) phi.push_back(num(v));
    for (double v : fit.theta) theta.push_back(num(v));
    return {{"model", "Regression with " + fit.spec.label() + " errors"},
            {"p", fit.spec.p},
            {"d", fit.spec.d},
            {"q", fit.spec.q},
            {"estimation", "conditional sum of squares"},
            {"beta", num(fit.beta)},
            {"intercept", num(fit.intercept)},
            {"phi", phi},
            {"theta", theta},
            {"coefficients", coefs},
            {"sigma2", num(fit.sigma2)},
            {"css", num(fit.css)},
            {"n_effective", fit.n_effective},
            {"loglik", num(fit.loglik)},
            {"aic", num(fit.aic)},
            {"aicc", num(fit.aicc)},
            {"bic", num(fit.bic)},
            {"optimizer_evaluations", fit.evaluations},
            {"best_start", fit.best_start}};
}

}  // namespace

json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

json to_json(const stats::TestResult& r) {
    json detail = json::object();
    for (const auto& [k, v] : r.detail) detail[k] = num(v);
    return {{"name", r.name},
            {"statistic", num(r.statistic)},
            {"p_value", num(r.p_value)},
            {"clamped", r.clamped},
            {"df_or_lags", r.df_or_lags},
            {"detail", detail}};
}

json PipelineConfig::to_json() const {
    return {{"input", input.string()},
            {"out", out_dir.string()},
            {"width", rolling.width},
            {"step", rolling.step},
            {"m", sampen.m},
            {"r_mode", sampen.tolerance.kind == entropy::ToleranceRule::Kind::Absolute ? "abs" : "rel"},
            {"r", num(sampen.tolerance.value)},
            {"order", {order.p, order.d, order.q}},
            {"auto_order", auto_order},
            {"horizon", horizon},
            {"ljung_box_lags", ljung_box_lags},
            {"ratio", num(ml.ratio)},
            {"svr_c", num(ml.svr.c)},
            {"svr_eps", num(ml.svr.epsilon)},
            {"svr_gamma", num(ml.svr.gamma)},
            {"knn_k", ml.knn_k},
            {"seed", seed}};
}

std::string render_rolling_csv(const series::RollingSeries& s, bool with_effective_r) {
    std::string out = with_effective_r ? "date,value,defined,effective_r\n" : "date,value,defined\n";
    for (const auto& p : s.points) {
        out += p.date.iso();
        out += ',';
        out += p.defined ? io::format_value(p.value) : std::string("nan");
        out += p.defined ? ",1" : ",0";
        if (with_effective_r) {
            out += ',';
            out += io::format_value(p.aux);
        }
        out += '\n';
    }
    return out;
}

series::RollingSeries read_rolling_csv(const fs::path& path) {
    const auto text = io::read_text_file(path);
    series::RollingSeries out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 || line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t s = 0;
        while (true) {
            const auto c = line.find(',', s);
            fields.push_back(line.substr(s, c == std::string::npos ? std::string::npos : c - s));
            if (c == std::string::npos) break;
            s = c + 1;
        }
        if (fields.size() < 3 || fields.size() > 4) throw MalformedRow(line_no, "rolling CSV needs 3 or 4 fields");
        const auto date = Date::parse(fields[0]);
        if (!date) throw MalformedRow(line_no, "bad date '" + fields[0] + "'");
        series::RollingPoint p;
        p.date = *date;
        p.defined = fields[2] == "1";
        p.value = p.defined ? std::strtod(fields[1].c_str(), nullptr) : std::numeric_limits<double>::quiet_NaN();
        if (fields.size() == 4) p.aux = std::strtod(fields[3].c_str(), nullptr);
        out.points.push_back(p);
    }
    return out;
}

json build_manifest(const fs::path& out_dir, const std::vector<fs::path>& files) {
    std::vector<std::string> names;
    for (const auto& f : files) names.push_back(f.filename().string());
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    json list = json::array();
    for (const auto& name : names) {
        const auto bytes = io::read_text_file(out_dir / name);
        list.push_back({{"path", name}, {"bytes", bytes.size()}, {"sha256", io::sha256_hex(bytes)}});
    }
    return {{"schema_version", kSchemaVersion}, {"files", list}};
}

StageResult cmd_ingest(const PipelineConfig& config) {
    if (config.input.empty()) throw IoFailure("ingest needs --input");
    const auto out = ensure_out(config);
    const auto cleaned = load_prices(config.input);
    const auto& s = cleaned.series.observations;
    const auto& rep = cleaned.report;

    StageResult res;
    ingest::write_series_csv(s, out / kPricesFile);
    json dates = json::array();
    for (const auto& d : rep.nonpositive_dates) dates.push_back(d.iso());
    res.summary = with_schema({{"source_id", cleaned.series.source_id},
                               {"input_rows", rep.input_rows},
                               {"kept", rep.kept},
                               {"dropped", rep.dropped()},
                               {"dropped_missing", rep.dropped_missing},
                               {"dropped_nonpositive", rep.dropped_nonpositive},
                               {"nonpositive_dates", dates},
                               {"drop_rule", "rows with the '.' missing-marker or a price <= 0 are dropped"},
                               {"first_date", s.front().date.iso()},
                               {"last_date", s.back().date.iso()}});
    write_json(out / "cleaning_report.json", res.summary);
    res.files = {out / kPricesFile, out / "cleaning_report.json"};
    return res;
}

StageResult cmd_rolling(const PipelineConfig& config) {
    const auto out = ensure_out(config);
    const fs::path source = config.input.empty() ? out / kPricesFile : config.input;
    const auto prices = load_prices(source);
    const auto returns = series::log_returns(prices.series);
    const auto ts_std = series::rolling_std(returns, config.rolling);
    const auto ts_sampen = entropy::rolling_sample_entropy(returns, config.rolling, config.sampen);

    StageResult res;
    ingest::write_series_csv(returns, out / "returns.csv");
    io::write_text_atomic(out / kStdFile, render_rolling_csv(ts_std, false));
    io::write_text_atomic(out / kSampEnFile, render_rolling_csv(ts_sampen, config.write_effective_r));

    svg::LineChart fig1{"Rolling standard deviation of log returns", "right-edge date", "std", true, {},
                        {{"ts_std", days_of(ts_std), values_of(ts_std), "#1f77b4"}}};
    svg::LineChart fig2{"Rolling sample entropy of log returns", "right-edge date", "SampEn (nats)", true, {},
                        {{"ts_SampEn", days_of(ts_sampen), values_of(ts_sampen), "#d62728"}}};
    io::write_text_atomic(out / "fig1_std.svg", svg::line_chart(fig1, config.svg_width, config.svg_height));
    io::write_text_atomic(out / "fig2_sampen.svg", svg::line_chart(fig2, config.svg_width, config.svg_height));

    std::size_t max_at = 0;
    for (std::size_t i = 1; i < ts_std.points.size(); ++i) {
        if (ts_std.points[i].value > ts_std.points[max_at].value) max_at = i;
    }
    res.summary = with_schema({{"prices", prices.series.size()},
                               {"returns", returns.size()},
                               {"rolling_points", ts_std.size()},
                               {"sampen_points", ts_sampen.size()},
                               {"sampen_undefined", ts_sampen.undefined_count()},
                               {"first_window_date", ts_std.points.front().date.iso()},
                               {"last_window_date", ts_std.points.back().date.iso()},
                               {"std_max", num(ts_std.points[max_at].value)},
                               {"std_max_date", ts_std.points[max_at].date.iso()}});
    res.files = {out / "returns.csv", out / kStdFile, out / kSampEnFile, out / "fig1_std.svg", out / "fig2_sampen.svg"};
    return res;
}

StageResult cmd_diagnose(const PipelineConfig& config) {
    const auto out = ensure_out(config);
    const auto rolling = load_rolling(config);
    std::size_t dropped = 0;
    const auto joined = ml::build_supervised(rolling.std_series, rolling.sampen, &dropped);

    StageResult res;
    json std_j = {{"adf", to_json(stats::adf_test(joined.y))},
                  {"ljung_box", to_json(stats::ljung_box(joined.y, config.ljung_box_lags, 0))}};
    json sampen_j = {{"adf", to_json(stats::adf_test(joined.x))},
                     {"ljung_box", to_json(stats::ljung_box(joined.x, config.ljung_box_lags, 0))}};
    res.summary = with_schema({{"n", joined.size()},
                               {"undefined_windows_dropped", dropped},
                               {"pearson_std_sampen", num(stats::pearson(joined.y, joined.x))},
                               {"ts_std", std_j},
                               {"ts_sampen", sampen_j}});
    write_json(out / "diagnostics.json", res.summary);
    res.files = {out / "diagnostics.json"};
    return res;
}

StageResult cmd_arimax(const PipelineConfig& config) {
    if (config.horizon == 0) throw HorizonZero("forecast horizon must be >= 1");
    const auto out = ensure_out(config);
    const auto rolling = load_rolling(config);
    std::size_t dropped = 0;
    const auto joined = ml::build_supervised(rolling.std_series, rolling.sampen, &dropped);
    DatedSeries y, x;
    for (std::size_t i = 0; i < joined.size(); ++i) {
        y.push_back({joined.dates[i], joined.y[i]});
        x.push_back({joined.dates[i], joined.x[i]});
    }

    arimax::FitOptions options;
    options.seed = config.seed;
    json selection = nullptr;
    arimax::ArimaxFit fit;
    if (config.auto_order) {
        auto sel = arimax::select_order(y, x, 5, 1, options);
        selection = json::array();
        for (const auto& c : sel.candidates) {
            selection.push_back({{"order", {c.spec.p, c.spec.d, c.spec.q}}, {"aicc", num(c.aicc)}, {"ok", c.ok}});
        }
        fit = std::move(sel.best);
    } else {
        fit = arimax::fit_regression_arima_errors(y, x, config.order, options);
    }
    const auto diag = arimax::residual_diagnostics(fit, config.ljung_box_lags);
    const auto fc = arimax::forecast(fit, config.horizon);

    StageResult res;
    json fit_j = fit_json(fit);
    fit_j["schema_version"] = kSchemaVersion;
    fit_j["undefined_windows_dropped"] = dropped;
    if (!selection.is_null()) fit_j["order_search"] = selection;
    write_json(out / "arimax_fit.json", fit_j);

    json acf_j = json::array();
    for (double v : diag.acf.values) acf_j.push_back(num(v));
    json hist_j = json::array();
    for (const auto& b : diag.histogram) hist_j.push_back({{"lo", num(b.lo)}, {"hi", num(b.hi)}, {"count", b.count}});
    json diag_j = with_schema({{"degenerate", diag.degenerate},
                               {"message", diag.message},
                               {"ljung_box", diag.degenerate ? json(nullptr) : to_json(diag.ljung_box)},
                               {"acf", acf_j},
                               {"histogram", hist_j}});
    write_json(out / "residual_diagnostics.json", diag_j);

    std::string csv = "step,point,lo80,hi80,lo95,hi95\n";
    for (const auto& s : fc.steps) {
        csv += std::to_string(s.step) + "," + io::format_value(s.point) + "," + io::format_value(s.lo80) + "," +
               io::format_value(s.hi80) + "," + io::format_value(s.lo95) + "," + io::format_value(s.hi95) + "\n";
    }
    io::write_text_atomic(out / "forecast.csv", csv);

    svg::LineChart trace{"Residuals", "right-edge date", "residual", true, {}, {}};
    {
        svg::Line l{"", {}, {}, "#333333"};
        for (const auto& r : fit.residuals) {
            l.xs.push_back(static_cast<double>(r.date.days_since_epoch()));
            l.ys.push_back(r.value);
        }
        trace.lines.push_back(std::move(l));
    }
    io::write_text_atomic(out / "fig3_residuals.svg",
                          svg::residual_panels("Residuals from regression with " + fit.spec.label() + " errors", trace,
                                               diag.acf.values, fit.residuals.size(), diag.histogram,
                                               config.svg_width, config.svg_height * 3 / 2));

    svg::LineChart fig4{"Forecasts from regression with " + fit.spec.label() + " errors", "time index", "std", false,
                        {}, {}};
    {
        const auto n = static_cast<double>(fit.y.size());
        svg::Line hist{"ts_std", {}, {}, "#333333"};
        for (std::size_t t = 0; t < fit.y.size(); ++t) {
            hist.xs.push_back(static_cast<double>(t + 1));
            hist.ys.push_back(fit.y[t]);
        }
        svg::Band b95{{}, {}, {}, "#c6dbef", 0.8};
        svg::Band b80{{}, {}, {}, "#6baed6", 0.8};
        svg::Line point{"forecast", {}, {}, "#08519c"};
        for (const auto& s : fc.steps) {
            const double t = n + static_cast<double>(s.step);
            b95.xs.push_back(t);
            b95.lo.push_back(s.lo95);
            b95.hi.push_back(s.hi95);
            b80.xs.push_back(t);
            b80.lo.push_back(s.lo80);
            b80.hi.push_back(s.hi80);
            point.xs.push_back(t);
            point.ys.push_back(s.point);
        }
        fig4.bands = {std::move(b95), std::move(b80)};
        fig4.lines = {std::move(hist), std::move(point)};
    }
    io::write_text_atomic(out / "fig4_forecast.svg", svg::line_chart(fig4, config.svg_width, config.svg_height));

    res.summary = {{"fit", fit_json(fit)},
                   {"residual_ljung_box", diag.degenerate ? json(nullptr) : to_json(diag.ljung_box)},
                   {"forecast_horizon", config.horizon},
                   {"forecast_held_at_mean", fc.held_at_mean}};
    res.files = {out / "arimax_fit.json", out / "residual_diagnostics.json", out / "forecast.csv",
                 out / "fig3_residuals.svg", out / "fig4_forecast.svg"};
    return res;
}

StageResult cmd_ml(const PipelineConfig& config) {
    const auto out = ensure_out(config);
    const auto rolling = load_rolling(config);
    std::size_t dropped = 0;
    const auto joined = ml::build_supervised(rolling.std_series, rolling.sampen, &dropped);
    const auto report = ml::run_comparison(joined, config.ml);

    StageResult res;
    json models = json::object();
    for (const auto& m : report.models) models[m.model] = metrics_json(m.metrics);
    json j = with_schema({{"n", joined.size()},
                          {"undefined_windows_dropped", dropped},
                          {"train_size", report.train_size},
                          {"test_size", report.test_size},
                          {"first_test_date", report.test_dates.front().iso()},
                          {"hyperparameters",
                           {{"ratio", num(config.ml.ratio)},
                            {"svr_c", num(config.ml.svr.c)},
                            {"svr_epsilon", num(config.ml.svr.epsilon)},
                            {"svr_gamma", num(config.ml.svr.gamma)},
                            {"svr_scaling", "feature and target standardised on the training set; epsilon in "
                                            "standardised target units; predictions inverted to raw units"},
                            {"knn_k", config.ml.knn_k}}},
                          {"ols", {{"slope", num(report.ols.slope)}, {"intercept", num(report.ols.intercept)}}},
                          {"svr_support_vectors", report.svr_support_vectors},
                          {"svr_iterations", report.svr_iterations},
                          {"metrics", models}});
    write_json(out / "ml_metrics.json", j);
    res.files.push_back(out / "ml_metrics.json");

    const auto days = days_of(report.test_dates);
    for (const auto& m : report.models) {
        std::string csv = "date,actual,predicted\n";
        for (std::size_t i = 0; i < report.test_dates.size(); ++i) {
            csv += report.test_dates[i].iso() + "," + io::format_value(report.test_actual[i]) + "," +
                   io::format_value(m.predicted[i]) + "\n";
        }
        const auto trace = out / ("trace_" + m.model + ".csv");
        io::write_text_atomic(trace, csv);
        svg::LineChart chart{"Actual versus predicted std on the test set (" + m.model + ")", "right-edge date", "std",
                             true, {},
                             {{"actual", days, report.test_actual, "#333333"}, {"predicted", days, m.predicted, "#d62728"}}};
        const auto fig = out / ("fig_ml_" + m.model + ".svg");
        io::write_text_atomic(fig, svg::line_chart(chart, config.svg_width, config.svg_height));
        res.files.push_back(trace);
        res.files.push_back(fig);
    }
    res.summary = j;
    return res;
}

json cmd_all(const PipelineConfig& config) {
    using clock = std::chrono::steady_clock;
    json timings = json::object();
    std::vector<fs::path> files;
    json report = {{"schema_version", kSchemaVersion}, {"tool_version", kToolVersion}, {"config", config.to_json()}};

    auto run = [&](const char* name, auto&& stage) {
        const auto t0 = clock::now();
        auto r = stage(config);
        timings[name] = num(std::chrono::duration<double>(clock::now() - t0).count());
        files.insert(files.end(), r.files.begin(), r.files.end());
        return r;
    };
    const auto ing = run("ingest", cmd_ingest);
    // later stages read the cleaned file written by ingest
    PipelineConfig downstream = config;
    downstream.input.clear();
    auto run_down = [&](const char* name, auto&& stage) {
        const auto t0 = clock::now();
        auto r = stage(downstream);
        timings[name] = num(std::chrono::duration<double>(clock::now() - t0).count());
        files.insert(files.end(), r.files.begin(), r.files.end());
        return r;
    };
    const auto roll = run_down("rolling", cmd_rolling);
    const auto diag = run_down("diagnose", cmd_diagnose);
    const auto ari = run_down("arimax", cmd_arimax);
    const auto mlr = run_down("ml", cmd_ml);

    const auto manifest = build_manifest(config.out_dir, files);
    write_json(config.out_dir / "manifest.json", manifest);

    report["cleaning"] = ing.summary;
    report["series"] = roll.summary;
    report["diagnostics"] = diag.summary;
    report["arimax"] = ari.summary;
    report["ml"] = mlr.summary;
    report["manifest"] = manifest;
    report["timings_seconds"] = timings;
    write_json(config.out_dir / "run_report.json", report);
    return report;
}

}  // namespace entrovol::pipeline
