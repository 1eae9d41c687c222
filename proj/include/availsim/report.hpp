#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "availsim/chaos.hpp"
#include "availsim/charts.hpp"
#include "availsim/simulate.hpp"

namespace availsim {

constexpr double kDeltaMin = 0.01;

struct BiasRow {
    double p_fail = 0.0;
    double live_aggregate = 0.0;
    double model_all = 0.0;
    double model_async = 0.0;
    double bias_all = 0.0;
    double bias_async = 0.0;
};

struct ErrorRow {
    std::string route;
    double p_fail = 0.0;
    Semantics semantics = Semantics::all_blocking;
    double model = 0.0;
    double live = 0.0;
    double error_pct = 0.0;
    bool undefined = false; // live stratum is 0, percentage has no value
};

struct ErrorSummary {
    double p_fail = 0.0;
    Semantics semantics = Semantics::all_blocking;
    std::size_t n = 0;
    std::size_t undefined_count = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double mean_abs_error = 0.0;
};

struct DeltaRow {
    std::string route; // "aggregate" pools routes with probe weights
    double p_fail = 0.0;
    double delta = 0.0;
    bool negligible = false;
};

namespace detail {

// Type-7 quantile (linear interpolation), the numpy/R default.
inline double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    size_t lo = static_cast<size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline std::map<std::pair<std::string, std::string>, double> live_by_stratum(
    const std::vector<LiveStat>& live) {
    std::map<std::pair<std::string, std::string>, double> out;
    for (const auto& st : live) out[{st.route, fmt_double(st.p_fail)}] = st.estimate;
    return out;
}

} // namespace detail

// One row per p_fail: probe-weighted model aggregates under both semantics
// against the pooled live aggregate. Requires every p_fail stratum to exist
// on both sides.
inline std::vector<BiasRow> bias_table(const std::vector<EstimateRecord>& predictions,
                                       const std::vector<LiveStat>& live,
                                       const std::map<std::string, double>& weights = {}) {
    if (predictions.empty()) throw ValidationError("no predictions");
    std::vector<AggregateRecord> agg = aggregate_availability(predictions, weights);
    std::map<std::string, BiasRow> rows;
    for (const auto& a : agg) {
        BiasRow& row = rows[fmt_double(a.p_fail)];
        row.p_fail = a.p_fail;
        if (a.semantics == Semantics::all_blocking) {
            row.model_all = a.estimate;
        } else {
            row.model_async = a.estimate;
        }
    }

    std::set<std::string> live_seen;
    for (const auto& st : live) {
        if (st.route != "aggregate") continue;
        auto it = rows.find(fmt_double(st.p_fail));
        if (it == rows.end()) {
            throw ValidationError("stratum mismatch: live p_fail " + fmt_double(st.p_fail) +
                                  " has no predictions");
        }
        it->second.live_aggregate = st.estimate;
        live_seen.insert(fmt_double(st.p_fail));
    }
    for (const auto& [key, row] : rows) {
        if (!live_seen.count(key)) {
            throw ValidationError("stratum mismatch: predictions p_fail " + fmt_double(row.p_fail) +
                                  " has no live aggregate");
        }
    }

    std::vector<BiasRow> out;
    for (auto& [key, row] : rows) {
        row.bias_all = row.model_all - row.live_aggregate;
        row.bias_async = row.model_async - row.live_aggregate;
        out.push_back(row);
    }
    std::sort(out.begin(), out.end(),
              [](const BiasRow& a, const BiasRow& b) { return a.p_fail < b.p_fail; });
    return out;
}

// Signed percentage error per (route, p_fail, semantics). Zero live
// availability marks the row undefined instead of dividing.
inline std::vector<ErrorRow> percentage_errors(const std::vector<EstimateRecord>& predictions,
                                               const std::vector<LiveStat>& live) {
    auto live_map = detail::live_by_stratum(live);
    std::vector<ErrorRow> out;
    for (const auto& rec : predictions) {
        auto it = live_map.find({rec.route, fmt_double(rec.p_fail)});
        if (it == live_map.end()) {
            throw ValidationError("stratum mismatch: no live data for route '" + rec.route +
                                  "' at p_fail " + fmt_double(rec.p_fail));
        }
        ErrorRow row;
        row.route = rec.route;
        row.p_fail = rec.p_fail;
        row.semantics = rec.semantics;
        row.model = rec.estimate;
        row.live = it->second;
        if (row.live == 0.0) {
            row.undefined = true;
        } else {
            row.error_pct = 100.0 * (row.model - row.live) / row.live;
        }
        out.push_back(std::move(row));
    }
    std::sort(out.begin(), out.end(), [](const ErrorRow& a, const ErrorRow& b) {
        if (a.route != b.route) return a.route < b.route;
        if (a.p_fail != b.p_fail) return a.p_fail < b.p_fail;
        return static_cast<int>(a.semantics) < static_cast<int>(b.semantics);
    });
    return out;
}

inline std::vector<ErrorSummary> error_summaries(const std::vector<ErrorRow>& rows) {
    std::map<std::pair<std::string, int>, std::vector<double>> groups;
    std::map<std::pair<std::string, int>, std::size_t> undefined;
    std::map<std::pair<std::string, int>, double> fracs;
    for (const auto& row : rows) {
        auto key = std::make_pair(fmt_double(row.p_fail), static_cast<int>(row.semantics));
        fracs[key] = row.p_fail;
        if (row.undefined) {
            undefined[key]++;
            groups[key];
        } else {
            groups[key].push_back(row.error_pct);
        }
    }
    std::vector<ErrorSummary> out;
    for (auto& [key, values] : groups) {
        ErrorSummary s;
        s.p_fail = fracs[key];
        s.semantics = static_cast<Semantics>(key.second);
        s.n = values.size();
        s.undefined_count = undefined.count(key) ? undefined[key] : 0;
        if (!values.empty()) {
            std::sort(values.begin(), values.end());
            s.median = detail::quantile(values, 0.5);
            s.q1 = detail::quantile(values, 0.25);
            s.q3 = detail::quantile(values, 0.75);
            double abs_sum = 0.0;
            for (double v : values) abs_sum += std::abs(v);
            s.mean_abs_error = abs_sum / static_cast<double>(values.size());
        }
        out.push_back(s);
    }
    std::sort(out.begin(), out.end(), [](const ErrorSummary& a, const ErrorSummary& b) {
        if (a.p_fail != b.p_fail) return a.p_fail < b.p_fail;
        return static_cast<int>(a.semantics) < static_cast<int>(b.semantics);
    });
    return out;
}

// async − all_blocking per (route, p_fail), plus the probe-weighted aggregate
// row per p_fail. Fails if either semantics is missing for a stratum.
inline std::vector<DeltaRow> delta_table(const std::vector<EstimateRecord>& predictions,
                                         const std::map<std::string, double>& weights = {}) {
    std::map<std::pair<std::string, std::string>, std::pair<std::optional<double>, std::optional<double>>>
        strata; // (route, p_fail) -> (all, async)
    std::map<std::string, double> fracs;
    for (const auto& rec : predictions) {
        auto key = std::make_pair(rec.route, fmt_double(rec.p_fail));
        fracs[key.second] = rec.p_fail;
        if (rec.semantics == Semantics::all_blocking) {
            strata[key].first = rec.estimate;
        } else {
            strata[key].second = rec.estimate;
        }
    }

    std::vector<DeltaRow> out;
    for (const auto& [key, pair] : strata) {
        if (!pair.first || !pair.second) {
            throw ValidationError("missing semantics stratum for route '" + key.first +
                                  "' at p_fail " + key.second);
        }
        DeltaRow row;
        row.route = key.first;
        row.p_fail = fracs[key.second];
        row.delta = *pair.second - *pair.first;
        row.negligible = std::abs(row.delta) < kDeltaMin;
        out.push_back(std::move(row));
    }

    std::vector<AggregateRecord> agg = aggregate_availability(predictions, weights);
    std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> agg_strata;
    for (const auto& a : agg) {
        if (a.semantics == Semantics::all_blocking) {
            agg_strata[fmt_double(a.p_fail)].first = a.estimate;
        } else {
            agg_strata[fmt_double(a.p_fail)].second = a.estimate;
        }
    }
    for (const auto& [key, pair] : agg_strata) {
        if (!pair.first || !pair.second) {
            throw ValidationError("missing semantics stratum in aggregate at p_fail " + key);
        }
        DeltaRow row;
        row.route = "aggregate";
        row.p_fail = fracs[key];
        row.delta = *pair.second - *pair.first;
        row.negligible = std::abs(row.delta) < kDeltaMin;
        out.push_back(std::move(row));
    }

    std::sort(out.begin(), out.end(), [](const DeltaRow& a, const DeltaRow& b) {
        if (a.route != b.route) return a.route < b.route;
        return a.p_fail < b.p_fail;
    });
    return out;
}

// ---- CSV emission ----

inline std::string save_bias_csv(const std::vector<BiasRow>& rows) {
    std::string out = "p_fail,live_aggregate,model_all,model_async,bias_all,bias_async\n";
    for (const auto& r : rows) {
        out += fmt_double(r.p_fail) + "," + fmt_double(r.live_aggregate) + "," +
               fmt_double(r.model_all) + "," + fmt_double(r.model_async) + "," +
               fmt_double(r.bias_all) + "," + fmt_double(r.bias_async) + "\n";
    }
    return out;
}

inline std::string save_errors_csv(const std::vector<ErrorRow>& rows) {
    std::string out = "route,p_fail,semantics,model,live,error_pct,undefined\n";
    for (const auto& r : rows) {
        out += r.route + "," + fmt_double(r.p_fail) + "," + std::string(semantics_name(r.semantics)) +
               "," + fmt_double(r.model) + "," + fmt_double(r.live) + ",";
        out += r.undefined ? "" : fmt_double(r.error_pct);
        out += ",";
        out += r.undefined ? "1" : "0";
        out += "\n";
    }
    return out;
}

inline std::string save_deltas_csv(const std::vector<DeltaRow>& rows) {
    std::string out = "route,p_fail,delta,negligible\n";
    for (const auto& r : rows) {
        out += r.route + "," + fmt_double(r.p_fail) + "," + fmt_double(r.delta) + "," +
               (r.negligible ? "1" : "0") + "\n";
    }
    return out;
}

// ---- charts ----

namespace detail {

struct ChartFrame {
    SvgCanvas svg;
    AxisScale x;
    AxisScale y;
};

inline ChartFrame chart_frame(double width, double height, double x_min, double x_max, double y_min,
                              double y_max, const std::string& title, const std::string& x_label,
                              const std::string& y_label) {
    const double left = 64, right = 24, top = 40, bottom = 48;
    ChartFrame frame{SvgCanvas(width, height),
                     {x_min, x_max, left, width - right},
                     {y_min, y_max, height - bottom, top}};
    frame.svg.text(width / 2.0, 22.0, title, 14.0, "middle", "#111111");
    frame.svg.line(left, top, left, height - bottom, palette::axis);
    frame.svg.line(left, height - bottom, width - right, height - bottom, palette::axis);
    frame.svg.text(width / 2.0, height - 12.0, x_label, 12.0, "middle");
    frame.svg.text(16.0, top - 10.0, y_label, 12.0, "start");
    return frame;
}

inline void x_ticks(ChartFrame& frame, const std::vector<double>& values) {
    double y0 = frame.y.pix_min;
    for (double v : values) {
        double px = frame.x(v);
        frame.svg.line(px, y0, px, y0 + 4.0, palette::axis);
        frame.svg.text(px, y0 + 18.0, fmt_label(v), 10.0, "middle");
    }
}

inline void y_ticks(ChartFrame& frame, const std::vector<double>& values, bool grid) {
    double x0 = frame.x.pix_min;
    double x1 = frame.x.pix_max;
    for (double v : values) {
        double py = frame.y(v);
        frame.svg.line(x0 - 4.0, py, x0, py, palette::axis);
        if (grid) frame.svg.line(x0, py, x1, py, palette::grid, 0.5);
        frame.svg.text(x0 - 8.0, py + 3.5, fmt_label(v), 10.0, "end");
    }
}

inline void legend_entry(SvgCanvas& svg, double x, double y, const std::string& color,
                         const std::string& label) {
    svg.line(x, y, x + 18.0, y, color, 2.0);
    svg.text(x + 24.0, y + 3.5, label, 10.0);
}

} // namespace detail

// Availability vs failure fraction: both model semantics as lines, live
// aggregate as points with 95% CI whiskers.
inline std::string render_availability_chart(const std::vector<BiasRow>& bias,
                                             const std::vector<LiveStat>& live) {
    if (bias.empty()) throw ValidationError("no bias rows to chart");
    std::vector<double> fracs;
    for (const auto& r : bias) fracs.push_back(r.p_fail);
    double x_min = fracs.front(), x_max = fracs.back();
    if (x_min == x_max) {
        x_min -= 0.05;
        x_max += 0.05;
    }

    auto frame = detail::chart_frame(640, 400, x_min, x_max, 0.0, 1.0,
                                     "Aggregate availability vs failure fraction",
                                     "failure fraction", "availability");
    detail::x_ticks(frame, fracs);
    detail::y_ticks(frame, {0.0, 0.25, 0.5, 0.75, 1.0}, true);

    std::vector<std::pair<double, double>> pts_all, pts_async;
    for (const auto& r : bias) {
        pts_all.emplace_back(frame.x(r.p_fail), frame.y(r.model_all));
        pts_async.emplace_back(frame.x(r.p_fail), frame.y(r.model_async));
    }
    frame.svg.polyline(pts_all, palette::all_blocking);
    frame.svg.polyline(pts_async, palette::async_sem);
    for (const auto& [px, py] : pts_all) frame.svg.circle(px, py, 3.0, palette::all_blocking);
    for (const auto& [px, py] : pts_async) frame.svg.circle(px, py, 3.0, palette::async_sem);

    for (const auto& st : live) {
        if (st.route != "aggregate") continue;
        double px = frame.x(st.p_fail);
        frame.svg.line(px, frame.y(st.ci_low), px, frame.y(st.ci_high), palette::live, 1.5);
        frame.svg.line(px - 4.0, frame.y(st.ci_low), px + 4.0, frame.y(st.ci_low), palette::live);
        frame.svg.line(px - 4.0, frame.y(st.ci_high), px + 4.0, frame.y(st.ci_high), palette::live);
        frame.svg.circle(px, frame.y(st.estimate), 3.5, palette::live);
    }

    detail::legend_entry(frame.svg, 80.0, 52.0, palette::all_blocking, "model all_blocking");
    detail::legend_entry(frame.svg, 80.0, 66.0, palette::async_sem, "model async");
    detail::legend_entry(frame.svg, 80.0, 80.0, palette::live, "live (95% CI)");
    return frame.svg.finish();
}

// async − all_blocking per route with the ±0.01 negligibility band.
inline std::string render_delta_chart(const std::vector<DeltaRow>& deltas) {
    if (deltas.empty()) throw ValidationError("no delta rows to chart");
    std::set<double> frac_set;
    std::vector<std::string> routes;
    double d_min = 0.0, d_max = 0.0;
    for (const auto& r : deltas) {
        frac_set.insert(r.p_fail);
        if (std::find(routes.begin(), routes.end(), r.route) == routes.end()) {
            routes.push_back(r.route);
        }
        d_min = std::min(d_min, r.delta);
        d_max = std::max(d_max, r.delta);
    }
    d_min = std::min(d_min, -1.5 * kDeltaMin);
    d_max = std::max(d_max, 1.5 * kDeltaMin);
    std::vector<double> fracs(frac_set.begin(), frac_set.end());
    double x_min = fracs.front(), x_max = fracs.back();
    if (x_min == x_max) {
        x_min -= 0.05;
        x_max += 0.05;
    }

    auto frame = detail::chart_frame(640, 400, x_min, x_max, d_min, d_max,
                                     "Semantics delta (async - all_blocking)", "failure fraction",
                                     "delta");
    detail::x_ticks(frame, fracs);
    detail::y_ticks(frame, {d_min, -kDeltaMin, 0.0, kDeltaMin, d_max}, false);
    frame.svg.line(frame.x.pix_min, frame.y(0.0), frame.x.pix_max, frame.y(0.0), palette::axis, 0.75);
    frame.svg.line(frame.x.pix_min, frame.y(kDeltaMin), frame.x.pix_max, frame.y(kDeltaMin),
                   palette::grid, 1.0, "4 3");
    frame.svg.line(frame.x.pix_min, frame.y(-kDeltaMin), frame.x.pix_max, frame.y(-kDeltaMin),
                   palette::grid, 1.0, "4 3");

    const std::vector<std::string> colors = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                             "#d62728", "#9467bd", "#8c564b"};
    double legend_y = 52.0;
    for (size_t ri = 0; ri < routes.size(); ++ri) {
        const std::string& color = colors[ri % colors.size()];
        std::vector<std::pair<double, double>> pts;
        for (double p : fracs) {
            for (const auto& r : deltas) {
                if (r.route == routes[ri] && r.p_fail == p) {
                    pts.emplace_back(frame.x(p), frame.y(r.delta));
                }
            }
        }
        frame.svg.polyline(pts, color, routes[ri] == "aggregate" ? 2.5 : 1.25);
        for (const auto& [px, py] : pts) frame.svg.circle(px, py, 2.5, color);
        detail::legend_entry(frame.svg, 80.0, legend_y, color, routes[ri]);
        legend_y += 14.0;
    }
    return frame.svg.finish();
}

// Percentage-error boxplots per (p_fail, semantics). Tukey convention:
// whiskers reach the farthest point within 1.5 IQR of the box; anything
// beyond is drawn as an outlier dot.
inline std::string render_error_chart(const std::vector<ErrorRow>& rows) {
    if (rows.empty()) throw ValidationError("no error rows to chart");
    std::map<std::pair<std::string, int>, std::vector<double>> groups;
    std::map<std::string, double> fracs;
    for (const auto& row : rows) {
        if (row.undefined) continue;
        groups[{fmt_double(row.p_fail), static_cast<int>(row.semantics)}].push_back(row.error_pct);
        fracs[fmt_double(row.p_fail)] = row.p_fail;
    }
    if (groups.empty()) throw ValidationError("every error stratum is undefined");

    std::vector<double> frac_values;
    for (const auto& [key, p] : fracs) frac_values.push_back(p);
    std::sort(frac_values.begin(), frac_values.end());

    double e_min = 0.0, e_max = 0.0;
    for (const auto& [key, values] : groups) {
        for (double v : values) {
            e_min = std::min(e_min, v);
            e_max = std::max(e_max, v);
        }
    }
    double pad = std::max(1.0, (e_max - e_min) * 0.08);
    e_min -= pad;
    e_max += pad;

    auto frame = detail::chart_frame(640, 400, -0.5, static_cast<double>(frac_values.size()) - 0.5,
                                     e_min, e_max, "Percentage error by failure fraction",
                                     "failure fraction", "error (%)");
    for (size_t i = 0; i < frac_values.size(); ++i) {
        double px = frame.x(static_cast<double>(i));
        frame.svg.line(px, frame.y.pix_min, px, frame.y.pix_min + 4.0, palette::axis);
        frame.svg.text(px, frame.y.pix_min + 18.0, fmt_label(frac_values[i]), 10.0, "middle");
    }
    detail::y_ticks(frame, {e_min, 0.0, e_max}, false);
    frame.svg.line(frame.x.pix_min, frame.y(0.0), frame.x.pix_max, frame.y(0.0), palette::grid, 1.0,
                   "4 3");

    const double box_w = 18.0;
    for (size_t i = 0; i < frac_values.size(); ++i) {
        for (int sem = 0; sem < 2; ++sem) {
            auto it = groups.find({fmt_double(frac_values[i]), sem});
            if (it == groups.end() || it->second.empty()) continue;
            std::vector<double> values = it->second;
            std::sort(values.begin(), values.end());
            double q1 = detail::quantile(values, 0.25);
            double q2 = detail::quantile(values, 0.5);
            double q3 = detail::quantile(values, 0.75);
            double iqr = q3 - q1;
            double lo_fence = q1 - 1.5 * iqr;
            double hi_fence = q3 + 1.5 * iqr;
            double whisk_lo = q1, whisk_hi = q3;
            for (double v : values) {
                if (v >= lo_fence) {
                    whisk_lo = v;
                    break;
                }
            }
            for (auto rit = values.rbegin(); rit != values.rend(); ++rit) {
                if (*rit <= hi_fence) {
                    whisk_hi = *rit;
                    break;
                }
            }

            const std::string color = sem == 0 ? palette::all_blocking : palette::async_sem;
            double cx = frame.x(static_cast<double>(i)) + (sem == 0 ? -box_w * 0.75 : box_w * 0.75);
            frame.svg.line(cx, frame.y(whisk_lo), cx, frame.y(q1), color);
            frame.svg.line(cx, frame.y(q3), cx, frame.y(whisk_hi), color);
            frame.svg.line(cx - box_w / 3.0, frame.y(whisk_lo), cx + box_w / 3.0, frame.y(whisk_lo),
                           color);
            frame.svg.line(cx - box_w / 3.0, frame.y(whisk_hi), cx + box_w / 3.0, frame.y(whisk_hi),
                           color);
            frame.svg.rect(cx - box_w / 2.0, frame.y(q3), box_w,
                           std::max(0.0, frame.y(q1) - frame.y(q3)), "none", color, 1.25);
            frame.svg.line(cx - box_w / 2.0, frame.y(q2), cx + box_w / 2.0, frame.y(q2), color, 2.0);
            for (double v : values) {
                if (v < lo_fence || v > hi_fence) frame.svg.circle(cx, frame.y(v), 2.0, color);
            }
        }
    }

    detail::legend_entry(frame.svg, 80.0, 52.0, palette::all_blocking, "all_blocking");
    detail::legend_entry(frame.svg, 80.0, 66.0, palette::async_sem, "async");
    return frame.svg.finish();
}

// ---- summary + orchestration ----

inline nlohmann::ordered_json summary_json(const std::vector<BiasRow>& bias,
                                           const std::vector<ErrorSummary>& summaries,
                                           const std::vector<DeltaRow>& deltas,
                                           const std::vector<EstimateRecord>* exact,
                                           const std::vector<EstimateRecord>& predictions) {
    nlohmann::ordered_json j;
    j["bias"] = nlohmann::ordered_json::array();
    for (const auto& r : bias) {
        nlohmann::ordered_json row;
        row["p_fail"] = r.p_fail;
        row["live_aggregate"] = r.live_aggregate;
        row["model_all"] = r.model_all;
        row["model_async"] = r.model_async;
        row["bias_all"] = r.bias_all;
        row["bias_async"] = r.bias_async;
        j["bias"].push_back(row);
    }
    j["error_summaries"] = nlohmann::ordered_json::array();
    for (const auto& s : summaries) {
        nlohmann::ordered_json row;
        row["p_fail"] = s.p_fail;
        row["semantics"] = semantics_name(s.semantics);
        row["n"] = s.n;
        row["undefined_count"] = s.undefined_count;
        row["median"] = s.median;
        row["q1"] = s.q1;
        row["q3"] = s.q3;
        row["mean_abs_error"] = s.mean_abs_error;
        j["error_summaries"].push_back(row);
    }
    j["deltas"] = nlohmann::ordered_json::array();
    std::size_t negligible = 0;
    for (const auto& d : deltas) {
        nlohmann::ordered_json row;
        row["route"] = d.route;
        row["p_fail"] = d.p_fail;
        row["delta"] = d.delta;
        row["negligible"] = d.negligible;
        j["deltas"].push_back(row);
        if (d.negligible) negligible++;
    }
    j["delta_min"] = kDeltaMin;
    j["negligible_deltas"] = negligible;
    j["total_deltas"] = deltas.size();

    if (exact != nullptr) {
        std::map<std::tuple<std::string, std::string, int>, double> exact_map;
        for (const auto& rec : *exact) {
            exact_map[{rec.route, fmt_double(rec.p_fail), static_cast<int>(rec.semantics)}] =
                rec.estimate;
        }
        double max_abs = 0.0;
        std::size_t matched = 0;
        bool within = true;
        for (const auto& rec : predictions) {
            auto it = exact_map.find(
                {rec.route, fmt_double(rec.p_fail), static_cast<int>(rec.semantics)});
            if (it == exact_map.end()) continue;
            matched++;
            double diff = std::abs(rec.estimate - it->second);
            max_abs = std::max(max_abs, diff);
            if (diff > 4.0 * rec.std_error) within = false;
        }
        nlohmann::ordered_json oracle;
        oracle["strata_compared"] = matched;
        oracle["max_abs_difference"] = max_abs;
        oracle["all_within_4_std_errors"] = within;
        j["oracle_check"] = oracle;
    }
    return j;
}

struct ReportPaths {
    std::string bias_csv;
    std::string errors_csv;
    std::string deltas_csv;
    std::string summary_json;
    std::vector<std::string> charts;
};

inline ReportPaths write_reports(const std::string& out_dir,
                                 const std::vector<EstimateRecord>& predictions,
                                 const ChaosResult& live_result,
                                 const std::vector<EstimateRecord>* exact = nullptr,
                                 const std::map<std::string, double>& weights = {},
                                 const nlohmann::ordered_json* metadata = nullptr) {
    std::vector<LiveStat> live = live_availability(live_result);
    std::vector<BiasRow> bias = bias_table(predictions, live, weights);
    std::vector<ErrorRow> errors = percentage_errors(predictions, live);
    std::vector<ErrorSummary> summaries = error_summaries(errors);
    std::vector<DeltaRow> deltas = delta_table(predictions, weights);

    ReportPaths paths;
    paths.bias_csv = out_dir + "/bias.csv";
    paths.errors_csv = out_dir + "/errors.csv";
    paths.deltas_csv = out_dir + "/deltas.csv";
    paths.summary_json = out_dir + "/summary.json";
    write_file(paths.bias_csv, save_bias_csv(bias));
    write_file(paths.errors_csv, save_errors_csv(errors));
    write_file(paths.deltas_csv, save_deltas_csv(deltas));

    nlohmann::ordered_json summary = summary_json(bias, summaries, deltas, exact, predictions);
    if (metadata != nullptr) summary["metadata"] = *metadata;
    write_file(paths.summary_json, summary.dump(2) + "\n");

    std::string availability_svg = out_dir + "/charts/availability.svg";
    std::string deltas_svg = out_dir + "/charts/deltas.svg";
    std::string errors_svg = out_dir + "/charts/errors.svg";
    write_file(availability_svg, render_availability_chart(bias, live));
    write_file(deltas_svg, render_delta_chart(deltas));
    write_file(errors_svg, render_error_chart(errors));
    paths.charts = {availability_svg, deltas_svg, errors_svg};
    return paths;
}

} // namespace availsim
