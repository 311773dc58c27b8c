#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "conjlab/errors.hpp"
#include "conjlab/map.hpp"

namespace conjlab {

struct ValidationCheck {
    std::string name;
    bool pass{};
    double residual{};
    std::string detail;
    bool informational{false};
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool ok() const {
        for (const auto& c : checks)
            if (!c.informational && !c.pass) return false;
        return true;
    }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& c : checks)
            os << (c.pass ? "  ok   " : "  FAIL ") << c.name
               << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
        return os.str();
    }
};

// Local scaling fit at a turning point: least-squares slope of
// log|f(c +- r) - f(c)| against log r over dyadic radii, one fit per side,
// plus the ratio of the two one-sided scaling constants.  A genuine
// order-alpha point gives slopes alpha and ratio 1.
template <class Real>
struct TurningFit {
    double slope_left{};
    double slope_right{};
    double constant_ratio{};  // left constant / right constant
    bool left_available{};
    bool right_available{};

    double slope() const {
        if (!left_available) return slope_right;
        if (!right_available) return slope_left;
        return (slope_left + slope_right) / 2.0;
    }
};

template <class Real>
TurningFit<Real> fit_turning_order(const MultimodalMap<Real>& map, Real c) {
    const auto& dom = map.domain();
    Real gap = std::min(c - dom.lo, dom.hi - c);
    for (const auto& t : map.turning_points()) {
        Real d = std::abs(t.location - c);
        if (d > map.snap_tol()) gap = std::min(gap, d);
    }
    const Real r0 = gap / Real(16);
    const Real fc = map.eval(c);
    const int scales = 8;

    auto side_fit = [&](int sign, double& slope, std::vector<double>& logmag) {
        std::vector<double> lx, ly;
        for (int j = 0; j < scales; ++j) {
            Real r = r0 / Real(1 << j);
            Real x = c + Real(sign) * r;
            if (!dom.contains(x)) return false;
            Real d = std::abs(map.eval(x) - fc);
            if (!(d > Real(0))) return false;
            lx.push_back(std::log(static_cast<double>(r)));
            ly.push_back(std::log(static_cast<double>(d)));
        }
        double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i]; sy += ly[i]; sxx += lx[i] * lx[i]; sxy += lx[i] * ly[i];
        }
        slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        logmag = ly;
        return true;
    };

    TurningFit<Real> fit;
    std::vector<double> left_mag, right_mag;
    fit.left_available = side_fit(-1, fit.slope_left, left_mag);
    fit.right_available = side_fit(+1, fit.slope_right, right_mag);
    if (fit.left_available && fit.right_available) {
        double acc = 0;
        for (std::size_t i = 0; i < left_mag.size(); ++i)
            acc += left_mag[i] - right_mag[i];
        fit.constant_ratio = std::exp(acc / static_cast<double>(left_mag.size()));
    } else {
        fit.constant_ratio = 1.0;
    }
    return fit;
}

// Ordered turning points with their declared orders re-verified against the
// observed scaling.  Band: +-0.05 on the exponent.
template <class Real>
std::vector<TurningPoint<Real>> verify_turning_orders(const MultimodalMap<Real>& map) {
    std::vector<TurningPoint<Real>> out;
    for (const auto& t : map.turning_points()) {
        auto fit = fit_turning_order(map, t.location);
        double declared = static_cast<double>(t.order);
        if (std::abs(fit.slope() - declared) > 0.05) {
            std::ostringstream os;
            os << map.label() << ": turning point at "
               << static_cast<double>(t.location) << " declared order " << declared
               << " but fitted scaling exponent is " << fit.slope();
            throw FlatnessError(os.str());
        }
        out.push_back(t);
    }
    return out;
}

// Structural validation: boundary preservation, interior ordered turning
// points, strict alternating monotonicity, matching one-sided scaling at each
// turning point, branch continuity.  Finiteness of periodic points is only
// checkable up to a period bound; that bound is recorded as an informational
// entry rather than silently assumed.
template <class Real>
ValidationReport validate_multimodal(const MultimodalMap<Real>& map,
                                     int fix_count_period_bound = 8) {
    ValidationReport rep;
    const auto& dom = map.domain();
    const Real W = dom.width();
    const Real tol = Real(1e-9) * std::max(Real(1), W);

    {
        Real fa = map.eval(dom.lo), fb = map.eval(dom.hi);
        auto bdist = [&](Real v) {
            return std::min(std::abs(v - dom.lo), std::abs(v - dom.hi));
        };
        Real r = std::max(bdist(fa), bdist(fb));
        rep.checks.push_back({"boundary-preserved", r <= tol,
                              static_cast<double>(r), ""});
    }
    {
        bool ok = true;
        Real prev = dom.lo;
        for (const auto& t : map.turning_points()) {
            if (!(t.location > prev + map.snap_tol()) || !(t.location < dom.hi - map.snap_tol()))
                ok = false;
            prev = t.location;
        }
        rep.checks.push_back({"turning-points-interior-ordered", ok, 0.0, ""});
    }
    {
        bool ok = true;
        std::string detail;
        bool prev_inc = false;
        bool first = true;
        for (const auto& b : map.branches()) {
            if (!first && b.increasing == prev_inc) {
                ok = false;
                detail = "adjacent branches share orientation";
            }
            prev_inc = b.increasing;
            first = false;
            const int n = 64;
            Real last = b.jet(b.lo).f;
            for (int i = 1; i <= n; ++i) {
                Real x = b.lo + (b.hi - b.lo) * Real(i) / Real(n);
                Real v = b.jet(x).f;
                Real step = b.increasing ? v - last : last - v;
                if (step < -tol) {
                    ok = false;
                    detail = "sampled monotonicity violated";
                }
                last = v;
            }
        }
        rep.checks.push_back({"branches-alternate-monotone", ok, 0.0, detail});
    }
    {
        bool ok = true;
        Real worst = Real(0);
        const auto& bs = map.branches();
        for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
            Real gap = std::abs(bs[i].jet(bs[i].hi).f - bs[i + 1].jet(bs[i + 1].lo).f);
            worst = std::max(worst, gap);
            if (gap > Real(1e-12) * std::max(Real(1), W)) ok = false;
        }
        rep.checks.push_back({"branch-continuity", ok, static_cast<double>(worst), ""});
    }
    for (const auto& t : map.turning_points()) {
        std::ostringstream name;
        name << "non-flat-order(" << static_cast<double>(t.location) << ")";
        auto fit = fit_turning_order(map, t.location);
        double declared = static_cast<double>(t.order);
        bool order_ok = std::abs(fit.slope() - declared) <= 0.05;
        bool sides_ok = !(fit.left_available && fit.right_available)
                        || (fit.constant_ratio > 0.8 && fit.constant_ratio < 1.25);
        bool nonflat = declared > 1.0 + 1e-12;
        std::ostringstream detail;
        detail << "declared=" << declared << " fitted=" << fit.slope()
               << " side-ratio=" << fit.constant_ratio;
        if (!nonflat) detail << " [order must exceed 1]";
        rep.checks.push_back({name.str(), order_ok && sides_ok && nonflat,
                              std::abs(fit.slope() - declared), detail.str()});
    }
    {
        std::ostringstream detail;
        detail << "finiteness of Fix(f^n) checked only up to period "
               << fix_count_period_bound;
        rep.checks.push_back({"periodic-point-finiteness", true, 0.0,
                              detail.str(), true});
    }
    return rep;
}

} // namespace conjlab
