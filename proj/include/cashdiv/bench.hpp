#pragma once

/**
 * @file bench.hpp
 * @brief Scenario configs, builtin experiments and CSV reports for the
 *        benchmark tool.
 *
 * A scenario fixes a market, an option template, a sweep (over strikes or
 * over one dividend's ex-date) and a list of methods. Every sweep point is
 * priced with each method and with a reference FDM solve; rows come out in
 * (sweep point, strike, method) order whatever the thread count.
 *
 * Config files are JSON:
 *
 *   {
 *     "name": "my-case",
 *     "market": { "spot": 100, "rate": 0.06, "vol": 0.25,
 *                 "discount_rate": 0.06,            // optional, defaults to rate
 *                 "dividends": [ {"ex_date": 0.9, "cash": 6, "proportional": 0} ] },
 *     "option": { "expiry": 7, "pay_date": 7, "kind": "call" },
 *     "sweep": { "type": "strike", "strikes": [70, 100, 130] },
 *     "methods": ["BB", "BB-LB", "MC", "FDM-liquidator"],
 *     "reference": { "space_steps": 10000, "time_steps": 3650, "s_max_multiplier": 5 },
 *     "mc": { "paths": 1000000, "seed": 1 }
 *   }
 *
 * Curves ("rate", "discount_rate", "vol") are either a number or
 * {"knots": [...], "values": [...]}. An ex-date sweep reads
 * { "type": "ex_date", "ex_dates": [...], "strikes": [...], "dividend_index": 0 }.
 * Method names are BB, BB-LB, MC, FDM, optionally suffixed with a dividend
 * policy (e.g. "MC-survivor", "FDM-liquidator").
 */

#include "cashdiv/pricer.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace cashdiv::bench {

using json = nlohmann::json;

struct MethodSpec {
    Method method = Method::BB;
    DividendPolicy policy = DividendPolicy::none;

    std::string label() const {
        std::string s(to_string(method));
        if (policy != DividendPolicy::none) s += "-" + std::string(to_string(policy));
        return s;
    }
};

inline MethodSpec parse_method_spec(const std::string& text) {
    for (DividendPolicy p : {DividendPolicy::liquidator, DividendPolicy::survivor, DividendPolicy::none}) {
        const std::string suffix = "-" + std::string(to_string(p));
        if (text.size() > suffix.size() && text.ends_with(suffix)) {
            MethodSpec m{parse_method(text.substr(0, text.size() - suffix.size())), p};
            if (m.method != Method::MC && m.method != Method::FDM) {
                throw ConfigError("dividend policy suffix only applies to MC and FDM: '" + text + "'");
            }
            if (m.method == Method::FDM && p == DividendPolicy::survivor) {
                throw ConfigError("the survivor policy is only available in MC: '" + text + "'");
            }
            return m;
        }
    }
    return {parse_method(text), DividendPolicy::none};
}

enum class SweepKind { strike, ex_date };

struct Sweep {
    SweepKind kind = SweepKind::strike;
    std::vector<double> ex_dates;  ///< ex_date sweeps only
    std::vector<double> strikes;
    std::size_t dividend_index = 0;

    std::size_t points() const { return kind == SweepKind::strike ? 1 : ex_dates.size(); }
};

struct Scenario {
    std::string name;
    MarketData market;
    double expiry = 0.0;
    double pay_date = 0.0;
    OptionKind kind = OptionKind::call;
    Sweep sweep;
    std::vector<MethodSpec> methods;
    FdmSettings reference;
    McSettings mc;
    QuadratureSettings quadrature;
};

namespace detail {

inline const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key + ": missing");
    return *it;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw ConfigError(path + ": expected a nonnegative integer");
    }
    return j.get<std::size_t>();
}

inline std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline double number_or(const json& j, const std::string& key, double fallback, const std::string& path) {
    return j.contains(key) ? number(j[key], path + "." + key) : fallback;
}

inline Curve curve(const json& j, CurveKind kind, const std::string& path) {
    try {
        if (j.is_number()) {
            const double v = j.get<double>();
            return kind == CurveKind::rate ? Curve::flat(v) : Curve::flat_vol(v);
        }
        return Curve(numbers(field(j, "knots", path), path + ".knots"),
                     numbers(field(j, "values", path), path + ".values"), kind);
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

// Validation errors from the library carry no field path; prefix one.
template <class F>
auto with_path(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
    using namespace detail;
    Scenario sc;
    if (!j.is_object()) throw ConfigError("config: expected an object");
    sc.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : "scenario";

    const json& mk = field(j, "market", "config");
    sc.market.spot = number(field(mk, "spot", "market"), "market.spot");
    sc.market.repo_curve = curve(field(mk, "rate", "market"), CurveKind::rate, "market.rate");
    sc.market.discount_curve = mk.contains("discount_rate")
                                   ? curve(mk["discount_rate"], CurveKind::rate, "market.discount_rate")
                                   : sc.market.repo_curve;
    sc.market.vol_curve = curve(field(mk, "vol", "market"), CurveKind::volatility, "market.vol");
    if (mk.contains("dividends")) {
        const json& ds = mk["dividends"];
        if (!ds.is_array()) throw ConfigError("market.dividends: expected an array");
        std::vector<Dividend> divs;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const std::string p = "market.dividends[" + std::to_string(i) + "]";
            divs.push_back({number(field(ds[i], "ex_date", p), p + ".ex_date"),
                            number_or(ds[i], "cash", 0.0, p), number_or(ds[i], "proportional", 0.0, p)});
        }
        sc.market.dividends = with_path("market.dividends", [&] { return DividendSchedule(divs); });
    }
    with_path("market", [&] { sc.market.validate(); return 0; });

    const json& op = field(j, "option", "config");
    sc.expiry = number(field(op, "expiry", "option"), "option.expiry");
    sc.pay_date = number_or(op, "pay_date", 0.0, "option");
    if (op.contains("kind")) {
        const std::string k = op["kind"].is_string() ? op["kind"].get<std::string>() : "";
        if (k == "call") sc.kind = OptionKind::call;
        else if (k == "put") sc.kind = OptionKind::put;
        else throw ConfigError("option.kind: expected \"call\" or \"put\"");
    }
    with_path("option", [&] {
        OptionSpec{0.0, sc.expiry, sc.pay_date, sc.kind, Method::BB}.validate();
        return 0;
    });

    const json& sw = field(j, "sweep", "config");
    const json& type = field(sw, "type", "sweep");
    const std::string t = type.is_string() ? type.get<std::string>() : "";
    sc.sweep.strikes = numbers(field(sw, "strikes", "sweep"), "sweep.strikes");
    if (sc.sweep.strikes.empty()) throw ConfigError("sweep.strikes: must not be empty");
    for (double k : sc.sweep.strikes) {
        if (!(k >= 0.0)) throw ConfigError("sweep.strikes: strikes must be >= 0");
    }
    if (t == "strike") {
        sc.sweep.kind = SweepKind::strike;
    } else if (t == "ex_date") {
        sc.sweep.kind = SweepKind::ex_date;
        sc.sweep.ex_dates = numbers(field(sw, "ex_dates", "sweep"), "sweep.ex_dates");
        if (sc.sweep.ex_dates.empty()) throw ConfigError("sweep.ex_dates: must not be empty");
        if (sw.contains("dividend_index")) {
            sc.sweep.dividend_index = count(sw["dividend_index"], "sweep.dividend_index");
        }
        if (sc.sweep.dividend_index >= sc.market.dividends.size()) {
            throw ConfigError("sweep.dividend_index: no such dividend in market.dividends");
        }
        for (double x : sc.sweep.ex_dates) {
            with_path("sweep.ex_dates", [&] {
                return sc.market.dividends.with_ex_date(sc.sweep.dividend_index, x);
            });
        }
    } else {
        throw ConfigError("sweep.type: expected \"strike\" or \"ex_date\"");
    }

    const json& ms = field(j, "methods", "config");
    if (!ms.is_array()) throw ConfigError("methods: expected an array of method names");
    if (ms.empty()) throw ConfigError("methods: must list at least one method");
    for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string p = "methods[" + std::to_string(i) + "]";
        if (!ms[i].is_string()) throw ConfigError(p + ": expected a string");
        sc.methods.push_back(with_path(p, [&] { return parse_method_spec(ms[i].get<std::string>()); }));
    }

    if (j.contains("reference")) {
        const json& rf = j["reference"];
        if (rf.contains("space_steps")) sc.reference.space_steps = count(rf["space_steps"], "reference.space_steps");
        if (rf.contains("time_steps")) sc.reference.time_steps = count(rf["time_steps"], "reference.time_steps");
        sc.reference.s_max_multiplier = number_or(rf, "s_max_multiplier", sc.reference.s_max_multiplier, "reference");
        with_path("reference", [&] { sc.reference.validate(); return 0; });
    }
    if (j.contains("mc")) {
        const json& mc = j["mc"];
        if (mc.contains("paths")) sc.mc.paths = count(mc["paths"], "mc.paths");
        if (mc.contains("seed")) sc.mc.seed = count(mc["seed"], "mc.seed");
        with_path("mc", [&] { sc.mc.validate(); return 0; });
    }
    if (j.contains("quadrature")) {
        sc.quadrature.abs_tolerance = number_or(j["quadrature"], "tolerance", sc.quadrature.abs_tolerance, "quadrature");
        with_path("quadrature", [&] { sc.quadrature.validate(); return 0; });
    }
    return sc;
}

/// Names accepted by builtin_config().
inline std::vector<std::string> builtin_names() {
    return {"vellekoop7y", "single-div", "gocsei10y", "zhang-extreme"};
}

namespace detail {

inline json grid(double lo, double hi, double step) {
    json out = json::array();
    for (double k = lo; k <= hi + 1e-9; k += step) out.push_back(k);
    return out;
}

}  // namespace detail

inline json builtin_config(const std::string& name) {
    if (name == "vellekoop7y") {
        json divs = json::array();
        const double cash[] = {6.0, 6.5, 7.0, 7.5, 8.0, 8.0, 8.0};
        for (int i = 0; i < 7; ++i) divs.push_back({{"ex_date", 0.9 + i}, {"cash", cash[i]}});
        return {{"name", name},
                {"market", {{"spot", 100.0}, {"rate", 0.06}, {"vol", 0.25}, {"dividends", divs}}},
                {"option", {{"expiry", 7.0}, {"kind", "call"}}},
                {"sweep", {{"type", "strike"}, {"strikes", {70.0, 100.0, 130.0}}}},
                {"methods", {"BB", "BB-LB", "MC", "FDM-liquidator"}},
                {"reference", {{"space_steps", 10000}, {"time_steps", 3650}}}};
    }
    if (name == "single-div") {
        json dates = {0.01};
        for (int i = 1; i <= 9; ++i) dates.push_back(0.1 * i);
        dates.push_back(0.99);
        return {{"name", name},
                {"market", {{"spot", 100.0}, {"rate", 0.06}, {"vol", 0.30},
                            {"dividends", {{{"ex_date", 0.5}, {"cash", 7.0}}}}}},
                {"option", {{"expiry", 1.0}, {"kind", "call"}}},
                {"sweep", {{"type", "ex_date"}, {"ex_dates", dates}, {"strikes", {50.0, 100.0, 150.0}},
                           {"dividend_index", 0}}},
                {"methods", {"BB", "BB-LB"}},
                {"reference", {{"space_steps", 10000}, {"time_steps", 1000}}}};
    }
    if (name == "gocsei10y") {
        json divs = json::array();
        for (int i = 0; i < 20; ++i) divs.push_back({{"ex_date", 1.0 / 365.0 + 0.5 * i}, {"cash", 2.0}});
        return {{"name", name},
                {"market", {{"spot", 100.0}, {"rate", 0.03}, {"vol", 0.25}, {"dividends", divs}}},
                {"option", {{"expiry", 10.0}, {"kind", "call"}}},
                {"sweep", {{"type", "strike"}, {"strikes", detail::grid(50.0, 200.0, 10.0)}}},
                {"methods", {"BB", "BB-LB"}},
                {"reference", {{"space_steps", 10000}, {"time_steps", 3650}}}};
    }
    if (name == "zhang-extreme") {
        return {{"name", name},
                {"market", {{"spot", 100.0}, {"rate", 0.05}, {"vol", 0.80},
                            {"dividends", {{{"ex_date", 0.3}, {"cash", 25.0}}, {{"ex_date", 0.7}, {"cash", 25.0}}}}}},
                {"option", {{"expiry", 1.0}, {"kind", "call"}}},
                {"sweep", {{"type", "strike"}, {"strikes", detail::grid(25.0, 200.0, 25.0)}}},
                {"methods", {"BB", "BB-LB"}},
                {"reference", {{"space_steps", 10000}, {"time_steps", 2000}}}};
    }
    std::string known;
    for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown builtin scenario '" + name + "' (known: " + known + ")");
}

/// A builtin name, or the path of a JSON config file.
inline Scenario load_scenario(const std::string& source) {
    const auto names = builtin_names();
    if (std::find(names.begin(), names.end(), source) != names.end()) {
        return parse_scenario(builtin_config(source));
    }
    std::ifstream in(source);
    if (!in) throw ConfigError(source + ": not a builtin scenario and not a readable file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return parse_scenario(j);
}

struct Row {
    std::string scenario;
    double sweep_value = 0.0;
    double strike = 0.0;
    std::string method;
    double price = std::numeric_limits<double>::quiet_NaN();
    double ref_price = std::numeric_limits<double>::quiet_NaN();
    double price_err = std::numeric_limits<double>::quiet_NaN();
    double vol_err = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
};

/// Market data at one sweep point.
inline MarketData market_at(const Scenario& sc, std::size_t point) {
    MarketData m = sc.market;
    if (sc.sweep.kind == SweepKind::ex_date) {
        m.dividends = m.dividends.with_ex_date(sc.sweep.dividend_index, sc.sweep.ex_dates[point]);
    }
    return m;
}

/// Prices every (sweep point, strike, method) with `threads` workers
/// (0 = hardware concurrency). Failures become NaN rows and a note on `log`.
inline std::vector<Row> run_scenario(const Scenario& sc, unsigned threads = 0, std::ostream& log = std::cerr) {
    const std::size_t n_strikes = sc.sweep.strikes.size();
    const std::size_t n_methods = sc.methods.size();
    const std::size_t jobs = sc.sweep.points() * n_strikes;
    std::vector<Row> rows(jobs * n_methods);
    std::mutex log_mutex;

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));

    auto run_job = [&](std::size_t job) {
        const std::size_t point = job / n_strikes;
        const double K = sc.sweep.strikes[job % n_strikes];
        const MarketData m = market_at(sc, point);
        const double sweep_value = sc.sweep.kind == SweepKind::strike ? K : sc.sweep.ex_dates[point];
        const OptionSpec base{K, sc.expiry, sc.pay_date, sc.kind, Method::FDM};
        auto note = [&](const std::string& what, const std::exception& e) {
            std::lock_guard lock(log_mutex);
            log << sc.name << ": " << what << " at sweep value " << sweep_value << ", strike " << K
                << ": " << e.what() << "\n";
        };

        PricingConfig cfg;
        cfg.quadrature = sc.quadrature;
        cfg.mc = sc.mc;
        cfg.mc.threads = threads > 1 ? 1 : 0;
        cfg.fdm = sc.reference;

        double ref = std::numeric_limits<double>::quiet_NaN();
        try {
            ref = price(m, base, cfg).price;
        } catch (const std::exception& e) {
            note("reference FDM failed", e);
        }
        for (std::size_t k = 0; k < n_methods; ++k) {
            Row& row = rows[job * n_methods + k];
            row.scenario = sc.name;
            row.sweep_value = sweep_value;
            row.strike = K;
            row.method = sc.methods[k].label();
            row.ref_price = ref;
            OptionSpec o = base;
            o.method = sc.methods[k].method;
            PricingConfig c = cfg;
            c.mc.policy = sc.methods[k].policy;
            c.fdm.policy = sc.methods[k].policy;
            try {
                const auto rep = price(m, o, c);
                row.price = rep.price;
                row.seconds = rep.diagnostics.seconds;
            } catch (const std::exception& e) {
                note(row.method + " failed", e);
                continue;
            }
            row.price_err = row.price - ref;
            try {
                row.vol_err = implied_vol_difference(m, o, row.price, ref);
            } catch (const std::exception&) {
                // outside the arbitrage band; left as NaN
            }
        }
    };

    if (threads <= 1) {
        for (std::size_t j = 0; j < jobs; ++j) run_job(j);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
            });
        }
        for (auto& t : pool) t.join();
    }
    return rows;
}

inline std::string format_number(double x, int digits = 17) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<Row>& rows) {
    out << "scenario,sweep_value,strike,method,price,ref_price,price_err,vol_err,seconds\n";
    for (const auto& r : rows) {
        out << r.scenario << ',' << format_number(r.sweep_value) << ',' << format_number(r.strike) << ','
            << r.method << ',' << format_number(r.price) << ',' << format_number(r.ref_price) << ','
            << format_number(r.price_err) << ',' << format_number(r.vol_err) << ','
            << format_number(r.seconds, 6) << '\n';
    }
}

struct TimingRow {
    std::string method;
    std::size_t dividends = 0;
    std::size_t options = 0;
    double seconds = 0.0;
    double seconds_half = 0.0;  ///< same batch with half the dividends
    double ratio = 0.0;         ///< seconds / seconds_half; about 4 for O(n^2)
};

/// Market with `n` equal dividends spread evenly over ten years.
inline MarketData timing_market(std::size_t n) {
    std::vector<double> dates, cash;
    for (std::size_t i = 0; i < n; ++i) {
        dates.push_back(10.0 * static_cast<double>(i + 1) / static_cast<double>(n + 1));
        cash.push_back(20.0 / static_cast<double>(n));
    }
    return MarketData::flat(100.0, 0.03, 0.25, DividendSchedule::cash_only(dates, cash));
}

/// Wall time to price `n_options` calls (strikes 50..150, expiry 10) with
/// each method, for `n_dividends` and for half as many dividends. Each batch
/// is timed `repeats` times and the fastest run is kept.
inline std::vector<TimingRow> run_timing(std::size_t n_dividends, std::size_t n_options,
                                         const std::vector<MethodSpec>& methods,
                                         const PricingConfig& cfg = {}, int repeats = 1) {
    if (n_dividends < 1) throw ConfigError("timing: at least one dividend is required");
    if (n_options < 1) throw ConfigError("timing: at least one option is required");
    if (methods.empty()) throw ConfigError("timing: methods must not be empty");
    auto batch = [&](const MethodSpec& ms, std::size_t n) {
        const MarketData m = timing_market(n);
        PricingConfig c = cfg;
        c.mc.policy = ms.policy;
        c.fdm.policy = ms.policy;
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < std::max(repeats, 1); ++rep) {
            const auto start = std::chrono::steady_clock::now();
            for (std::size_t i = 0; i < n_options; ++i) {
                const double K = n_options == 1 ? 100.0
                                                : 50.0 + 100.0 * static_cast<double>(i) /
                                                             static_cast<double>(n_options - 1);
                price_call(m, {K, 10.0, 0.0, OptionKind::call, ms.method}, c);
            }
            best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        }
        return best;
    };
    std::vector<TimingRow> out;
    for (const auto& ms : methods) {
        TimingRow row;
        row.method = ms.label();
        row.dividends = n_dividends;
        row.options = n_options;
        row.seconds = batch(ms, n_dividends);
        row.seconds_half = batch(ms, std::max<std::size_t>(1, n_dividends / 2));
        row.ratio = row.seconds / row.seconds_half;
        out.push_back(row);
    }
    return out;
}

}  // namespace cashdiv::bench
