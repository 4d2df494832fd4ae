#pragma once

// Benchmark harness: error statistics, correlation, per-clip and pooled
// reports, and their JSON / CSV / SVG renderings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "error.hpp"
#include "fuse.hpp"
#include "pipeline.hpp"
#include "records.hpp"
#include "synth.hpp"
#include "vidio.hpp"

namespace blurvitals::eval {

using nlohmann::json;

struct MaeSd {
    double mae = 0.0;
    double sd = 0.0;
};

/// Mean and population standard deviation of absolute errors.
inline MaeSd mae_sd(std::span<const double> estimates, std::span<const double> reference) {
    if (estimates.size() != reference.size()) throw ValidationError("estimate and reference series differ in length");
    if (estimates.empty()) throw DataError("empty pool: no estimate/reference pairs survive");
    const double n = static_cast<double>(estimates.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) sum += std::abs(estimates[i] - reference[i]);
    const double mae = sum / n;
    double var = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double d = std::abs(estimates[i] - reference[i]) - mae;
        var += d * d;
    }
    return {mae, std::sqrt(var / n)};
}

/// Statistics of a pool of absolute errors.
inline MaeSd pool_stats(std::span<const double> abs_errors) {
    const std::vector<double> zeros(abs_errors.size(), 0.0);
    return mae_sd(abs_errors, zeros);
}

struct Correlation {
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};

/// Sample Pearson r with a two-sided p from Student's t on n-2 degrees of freedom.
inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("correlation series differ in length");
    if (x.size() < 3) throw DataError("correlation needs at least 3 pairs");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DataError("undefined correlation: a series has zero variance");
    Correlation c;
    c.n = x.size();
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = n - 2.0;
    if (dof < 1.0) {
        c.p = 1.0;
    } else if (std::abs(c.r) >= 1.0) {
        c.p = 0.0;
    } else {
        const double t = c.r * std::sqrt(dof / (1.0 - c.r * c.r));
        const boost::math::students_t dist(dof);
        c.p = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
    }
    return c;
}

/// Linear interpolation of (t, v) at `at`, holding the end values outside the range.
inline double interpolate(std::span<const double> t, std::span<const double> v, double at) {
    if (t.empty() || t.size() != v.size()) throw DataError("reference series is empty or malformed");
    if (at <= t.front()) return v.front();
    if (at >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), at);
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double a = (at - t[i - 1]) / (t[i] - t[i - 1]);
    return v[i - 1] + a * (v[i] - v[i - 1]);
}

/// Paired samples for one vital: absolute errors plus the raw pairs.
struct Pool {
    std::vector<double> estimate;
    std::vector<double> reference;
    std::vector<double> abs_error;
    /// Ungated windows that produced no estimate.
    std::size_t missing = 0;

    void add(double est, double ref) {
        estimate.push_back(est);
        reference.push_back(ref);
        abs_error.push_back(std::abs(est - ref));
    }
    void append(const Pool& o) {
        estimate.insert(estimate.end(), o.estimate.begin(), o.estimate.end());
        reference.insert(reference.end(), o.reference.begin(), o.reference.end());
        abs_error.insert(abs_error.end(), o.abs_error.begin(), o.abs_error.end());
        missing += o.missing;
    }
    std::optional<MaeSd> stats() const {
        if (abs_error.empty()) return std::nullopt;
        return pool_stats(abs_error);
    }
    /// Fraction of ungated windows (missing ones count as failures) within tol.
    double fraction_within(double tol) const {
        const std::size_t total = abs_error.size() + missing;
        if (total == 0) return 0.0;
        const auto ok = std::count_if(abs_error.begin(), abs_error.end(), [&](double e) { return e <= tol; });
        return static_cast<double>(ok) / static_cast<double>(total);
    }
};

struct ClipRow {
    std::string id;
    synth::Condition condition;
    Pool hr;
    Pool rr;
    std::size_t windows = 0;
    std::size_t gated = 0;
    std::string error;

    bool ok() const { return error.empty(); }
};

struct Summary {
    std::optional<MaeSd> hr;
    std::optional<MaeSd> rr;
    std::size_t windows = 0;
    std::size_t gated = 0;
    double gated_fraction() const { return windows == 0 ? 0.0 : static_cast<double>(gated) / static_cast<double>(windows); }
};

struct EvalReport {
    std::vector<ClipRow> rows;
    Summary overall;
    std::optional<Correlation> hr_corr;
    std::optional<Correlation> rr_corr;
    /// Keyed by "<covered|uncovered>-r<radius>".
    std::map<std::string, Summary> by_condition;

    /// Pooled summary over the rows accepted by `keep`.
    template <typename Pred>
    Summary summarize(Pred keep) const {
        Pool hr, rr;
        Summary s;
        for (const auto& row : rows) {
            if (!row.ok() || !keep(row)) continue;
            hr.append(row.hr);
            rr.append(row.rr);
            s.windows += row.windows;
            s.gated += row.gated;
        }
        s.hr = hr.stats();
        s.rr = rr.stats();
        return s;
    }

    template <typename Pred>
    Pool pooled(Pred keep, bool heart) const {
        Pool p;
        for (const auto& row : rows)
            if (row.ok() && keep(row)) p.append(heart ? row.hr : row.rr);
        return p;
    }
};

inline std::string group_key(const synth::Condition& c) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s-r%g", c.covered ? "covered" : "uncovered", c.blur_radius);
    return buf;
}

/// Aligns estimates to the reference by interpolating the reference at each window center.
inline void score_clip(ClipRow& row, const std::vector<fuse::VitalEstimate>& estimates, const synth::GroundTruth& gt) {
    for (const auto& e : estimates) {
        ++row.windows;
        if (e.gated) {
            ++row.gated;
            continue;
        }
        const double hr_ref = interpolate(gt.t_center_s, gt.hr_bpm, e.t_center_s);
        const double rr_ref = interpolate(gt.t_center_s, gt.rr_bpm, e.t_center_s);
        if (e.hr_bpm)
            row.hr.add(*e.hr_bpm, hr_ref);
        else
            ++row.hr.missing;
        if (e.rr_bpm)
            row.rr.add(*e.rr_bpm, rr_ref);
        else
            ++row.rr.missing;
    }
}

/// Estimates that copy the reference exactly; checks the harness itself.
inline std::vector<fuse::VitalEstimate> truth_estimates(const synth::GroundTruth& gt) {
    std::vector<fuse::VitalEstimate> out;
    for (std::size_t w = 0; w < gt.t_center_s.size(); ++w) {
        fuse::VitalEstimate e;
        e.window_index = w;
        e.t_center_s = gt.t_center_s[w];
        e.hr_bpm = gt.hr_bpm[w];
        e.rr_bpm = gt.rr_bpm[w];
        e.hr_quality = spectra::kSnrCeilingDb;
        e.rr_quality = spectra::kSnrCeilingDb;
        out.push_back(e);
    }
    return out;
}

inline void finalize(EvalReport& report) {
    report.overall = report.summarize([](const ClipRow&) { return true; });
    report.by_condition.clear();
    for (const auto& row : report.rows) {
        if (!row.ok()) continue;
        const std::string key = group_key(row.condition);
        if (report.by_condition.count(key)) continue;
        report.by_condition[key] =
            report.summarize([&](const ClipRow& r) { return group_key(r.condition) == key; });
    }
    auto corr = [&](bool heart) -> std::optional<Correlation> {
        const Pool p = report.pooled([](const ClipRow&) { return true; }, heart);
        try {
            return pearson(p.estimate, p.reference);
        } catch (const DataError&) {
            return std::nullopt;
        }
    };
    report.hr_corr = corr(true);
    report.rr_corr = corr(false);
}

struct BenchmarkOptions {
    bool truth_injection = false;
    /// Read per-clip estimates (<clip stem>.ndjson) instead of running the pipeline.
    std::optional<std::filesystem::path> estimates_in;
    /// Write per-clip estimates here when the pipeline runs.
    std::optional<std::filesystem::path> estimates_out;
};

inline EvalReport run_benchmark(const synth::Manifest& manifest, const PipelineConfig& cfg,
                                const BenchmarkOptions& opt = {}) {
    EvalReport report;
    if (opt.estimates_out) std::filesystem::create_directories(*opt.estimates_out);
    for (const auto& entry : manifest.entries) {
        ClipRow row;
        row.id = entry.clip.stem().string();
        row.condition = entry.condition;
        try {
            const synth::GroundTruth gt = synth::read_truth(manifest.truth_path(entry));
            std::vector<fuse::VitalEstimate> estimates;
            if (opt.truth_injection) {
                estimates = truth_estimates(gt);
            } else if (opt.estimates_in) {
                estimates = records::read_estimates(*opt.estimates_in / (row.id + ".ndjson"));
            } else {
                const vidio::VideoClip clip = vidio::read_clip(manifest.clip_path(entry));
                estimates = process_clip(clip, cfg);
                if (opt.estimates_out) records::write_estimates(estimates, *opt.estimates_out / (row.id + ".ndjson"));
            }
            score_clip(row, estimates, gt);
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    finalize(report);
    return report;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline json opt_stats(const std::optional<MaeSd>& s, const char* mae_key, const char* sd_key) {
    json j = json::object();
    j[mae_key] = s ? json(s->mae) : json(nullptr);
    j[sd_key] = s ? json(s->sd) : json(nullptr);
    return j;
}

inline json summary_json(const Summary& s) {
    json j = opt_stats(s.hr, "hr_mae", "hr_sd");
    j.update(opt_stats(s.rr, "rr_mae", "rr_sd"));
    j["windows"] = s.windows;
    j["gated_windows"] = s.gated;
    j["gated_fraction"] = s.gated_fraction();
    return j;
}

inline std::string fmt(double v, int prec = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

inline std::string fmt(const std::optional<double>& v, int prec = 3) { return v ? fmt(*v, prec) : std::string(); }

} // namespace detail

inline json to_json(const EvalReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json j = detail::opt_stats(row.hr.stats(), "hr_mae", "hr_sd");
        j.update(detail::opt_stats(row.rr.stats(), "rr_mae", "rr_sd"));
        j["id"] = row.id;
        j["condition"] = {{"covered", row.condition.covered},
                          {"blur_radius", row.condition.blur_radius},
                          {"posture_deg", row.condition.posture_deg}};
        j["windows"] = row.windows;
        j["gated_windows"] = row.gated;
        j["hr_missing"] = row.hr.missing;
        j["rr_missing"] = row.rr.missing;
        j["hr_abs_errors"] = row.hr.abs_error;
        j["rr_abs_errors"] = row.rr.abs_error;
        if (!row.ok()) j["error"] = row.error;
        rows.push_back(std::move(j));
    }
    json conds = json::object();
    for (const auto& [k, s] : r.by_condition) conds[k] = detail::summary_json(s);
    auto corr = [](const std::optional<Correlation>& c, const char* rk, const char* pk) {
        json j = json::object();
        j[rk] = c ? json(c->r) : json(nullptr);
        j[pk] = c ? json(c->p) : json(nullptr);
        return j;
    };
    json correlations = corr(r.hr_corr, "hr_r", "hr_p");
    correlations.update(corr(r.rr_corr, "rr_r", "rr_p"));
    json overall = detail::summary_json(r.overall);
    return {{"per_subject", rows},
            {"overall", overall},
            {"by_condition", conds},
            {"correlations", correlations},
            {"gated_fraction", r.overall.gated_fraction()}};
}

inline std::string to_csv(const EvalReport& r) {
    std::string out = "id,covered,blur_radius,posture_deg,hr_mae,hr_sd,rr_mae,rr_sd,windows,gated,error\n";
    for (const auto& row : r.rows) {
        const auto hr = row.hr.stats();
        const auto rr = row.rr.stats();
        out += row.id + "," + (row.condition.covered ? "1" : "0") + "," + detail::fmt(row.condition.blur_radius, 2) +
               "," + detail::fmt(row.condition.posture_deg, 1) + "," +
               detail::fmt(hr ? std::optional<double>(hr->mae) : std::nullopt) + "," +
               detail::fmt(hr ? std::optional<double>(hr->sd) : std::nullopt) + "," +
               detail::fmt(rr ? std::optional<double>(rr->mae) : std::nullopt) + "," +
               detail::fmt(rr ? std::optional<double>(rr->sd) : std::nullopt) + "," + std::to_string(row.windows) +
               "," + std::to_string(row.gated) + "," + (row.ok() ? "" : "\"" + row.error + "\"") + "\n";
    }
    const auto& o = r.overall;
    out += "overall,,,," + detail::fmt(o.hr ? std::optional<double>(o.hr->mae) : std::nullopt) + "," +
           detail::fmt(o.hr ? std::optional<double>(o.hr->sd) : std::nullopt) + "," +
           detail::fmt(o.rr ? std::optional<double>(o.rr->mae) : std::nullopt) + "," +
           detail::fmt(o.rr ? std::optional<double>(o.rr->sd) : std::nullopt) + "," + std::to_string(o.windows) + "," +
           std::to_string(o.gated) + ",\n";
    return out;
}

inline std::string summary_line(const EvalReport& r) {
    const auto& o = r.overall;
    return "overall HR MAE " + (o.hr ? detail::fmt(o.hr->mae, 2) : std::string("n/a")) + " bpm, RR MAE " +
           (o.rr ? detail::fmt(o.rr->mae, 2) : std::string("n/a")) + " bpm, gated fraction " +
           detail::fmt(o.gated_fraction(), 3);
}

namespace detail {

inline double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto i = static_cast<std::size_t>(pos);
    const double a = pos - static_cast<double>(i);
    return i + 1 < v.size() ? v[i] * (1 - a) + v[i + 1] * a : v[i];
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Per-condition boxplots of per-clip MAE, one panel each for HR and RR.
inline std::string boxplot_svg(const EvalReport& r) {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (const auto& row : r.rows) {
        if (!row.ok()) continue;
        auto& g = groups[group_key(row.condition)];
        if (auto s = row.hr.stats()) g.first.push_back(s->mae);
        if (auto s = row.rr.stats()) g.second.push_back(s->mae);
    }
    double ymax = 1.0;
    for (const auto& [k, g] : groups) {
        for (double v : g.first) ymax = std::max(ymax, v);
        for (double v : g.second) ymax = std::max(ymax, v);
    }
    ymax *= 1.1;
    const int panel_w = std::max<int>(200, 90 * static_cast<int>(groups.size()) + 60);
    const int h = 320;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * panel_w << "\" height=\"" << h << "\">\n";
    for (int panel = 0; panel < 2; ++panel) {
        const int x0 = panel * panel_w;
        os << "<g>\n<text x=\"" << x0 + 10 << "\" y=\"20\">" << (panel == 0 ? "HR" : "RR") << " MAE (bpm)</text>\n";
        os << "<line x1=\"" << x0 + 40 << "\" y1=\"" << h - 40 << "\" x2=\"" << x0 + panel_w - 10 << "\" y2=\""
           << h - 40 << "\" stroke=\"black\"/>\n";
        auto ypix = [&](double v) { return (h - 40) - (h - 80) * v / ymax; };
        int i = 0;
        for (const auto& [key, g] : groups) {
            const auto& vals = panel == 0 ? g.first : g.second;
            const double cx = x0 + 60 + 90 * i + 30;
            ++i;
            os << "<text x=\"" << cx - 30 << "\" y=\"" << h - 20 << "\" font-size=\"9\">" << detail::xml_escape(key)
               << "</text>\n";
            if (vals.empty()) continue;
            const double q0 = detail::quantile(vals, 0.0), q1 = detail::quantile(vals, 0.25),
                         q2 = detail::quantile(vals, 0.5), q3 = detail::quantile(vals, 0.75),
                         q4 = detail::quantile(vals, 1.0);
            os << "<line x1=\"" << cx << "\" y1=\"" << ypix(q0) << "\" x2=\"" << cx << "\" y2=\"" << ypix(q4)
               << "\" stroke=\"black\"/>\n";
            os << "<rect x=\"" << cx - 15 << "\" y=\"" << ypix(q3) << "\" width=\"30\" height=\""
               << std::max(1.0, ypix(q1) - ypix(q3)) << "\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
            os << "<line x1=\"" << cx - 15 << "\" y1=\"" << ypix(q2) << "\" x2=\"" << cx + 15 << "\" y2=\"" << ypix(q2)
               << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Estimate-vs-reference scatter with least-squares fitted lines.
inline std::string scatter_svg(const EvalReport& r) {
    std::ostringstream os;
    const int panel = 300;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * panel << "\" height=\"" << panel << "\">\n";
    for (int k = 0; k < 2; ++k) {
        const Pool p = r.pooled([](const ClipRow&) { return true; }, k == 0);
        const int x0 = k * panel;
        os << "<g>\n<text x=\"" << x0 + 10 << "\" y=\"20\">" << (k == 0 ? "HR" : "RR")
           << " estimate vs reference (bpm)</text>\n";
        if (p.estimate.empty()) {
            os << "</g>\n";
            continue;
        }
        double lo = p.reference.front(), hi = lo;
        for (std::size_t i = 0; i < p.estimate.size(); ++i) {
            lo = std::min({lo, p.estimate[i], p.reference[i]});
            hi = std::max({hi, p.estimate[i], p.reference[i]});
        }
        lo -= 2.0;
        hi += 2.0;
        auto px = [&](double v) { return x0 + 30 + (panel - 50) * (v - lo) / (hi - lo); };
        auto py = [&](double v) { return (panel - 30) - (panel - 60) * (v - lo) / (hi - lo); };
        for (std::size_t i = 0; i < p.estimate.size(); ++i)
            os << "<circle cx=\"" << px(p.reference[i]) << "\" cy=\"" << py(p.estimate[i])
               << "\" r=\"2\" fill=\"#3182bd\"/>\n";
        const double n = static_cast<double>(p.estimate.size());
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < p.estimate.size(); ++i) {
            mx += p.reference[i];
            my += p.estimate[i];
        }
        mx /= n;
        my /= n;
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < p.estimate.size(); ++i) {
            sxy += (p.reference[i] - mx) * (p.estimate[i] - my);
            sxx += (p.reference[i] - mx) * (p.reference[i] - mx);
        }
        const double slope = sxx > 0 ? sxy / sxx : 0.0;
        const double icept = my - slope * mx;
        os << "<line x1=\"" << px(lo) << "\" y1=\"" << py(icept + slope * lo) << "\" x2=\"" << px(hi) << "\" y2=\""
           << py(icept + slope * hi) << "\" stroke=\"#e6550d\"/>\n";
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

struct ReportPaths {
    std::filesystem::path json;
    std::filesystem::path csv;
    std::optional<std::filesystem::path> boxplot_svg;
    std::optional<std::filesystem::path> scatter_svg;
};

inline ReportPaths write_report(const EvalReport& r, const std::filesystem::path& dir, bool emit_svg) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir)) throw IoError(dir, "cannot create report directory");
    ReportPaths p{dir / "report.json", dir / "report.csv", std::nullopt, std::nullopt};
    vidio::detail::write_atomic(p.json, to_json(r).dump(2) + "\n");
    vidio::detail::write_atomic(p.csv, to_csv(r));
    if (emit_svg) {
        p.boxplot_svg = dir / "boxplot.svg";
        p.scatter_svg = dir / "scatter.svg";
        vidio::detail::write_atomic(*p.boxplot_svg, boxplot_svg(r));
        vidio::detail::write_atomic(*p.scatter_svg, scatter_svg(r));
    }
    return p;
}

} // namespace blurvitals::eval
