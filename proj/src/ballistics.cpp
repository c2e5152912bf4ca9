#include "archery/ballistics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "archery/error.hpp"

namespace archery {

void BowModel::validate() const {
    if (!(rated_draw_force > 0 && rated_draw_length > 0 && brace_distance > 0 && arrow_mass > 0)) {
        throw InvalidConfig("bow parameters must be positive");
    }
    if (!(efficiency > 0 && efficiency <= 1.0)) {
        throw InvalidConfig(fmt::format("bow efficiency must lie in (0, 1], got {}", efficiency));
    }
    if (!(brace_distance < rated_draw_length)) {
        throw InvalidConfig("brace distance must be shorter than the rated draw length");
    }
}

double launch_speed(const BowModel& bow, double draw_length) {
    bow.validate();
    if (!(draw_length >= bow.brace_distance)) {
        throw InvalidInput(
            fmt::format("draw length {} m is shorter than the brace distance {} m", draw_length, bow.brace_distance));
    }
    const double extension = draw_length - bow.brace_distance;
    const double energy = 0.5 * bow.spring_constant() * extension * extension;
    return std::sqrt(2.0 * bow.efficiency * energy / bow.arrow_mass);
}

double LandingPoint::distance() const { return std::hypot(x, y); }

namespace {

// Planar state: s along the ground track, z up.
struct State {
    double s, z, vs, vz;
};

State deriv(const State& st, double k) {
    const double speed = std::hypot(st.vs, st.vz);
    return {st.vs, st.vz, -k * speed * st.vs, -kGravity - k * speed * st.vz};
}

State axpy(const State& a, double h, const State& d) {
    return {a.s + h * d.s, a.z + h * d.z, a.vs + h * d.vs, a.vz + h * d.vz};
}

State rk4(const State& st, double h, double k) {
    const State k1 = deriv(st, k);
    const State k2 = deriv(axpy(st, 0.5 * h, k1), k);
    const State k3 = deriv(axpy(st, 0.5 * h, k2), k);
    const State k4 = deriv(axpy(st, h, k3), k);
    return {st.s + h / 6.0 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s), st.z + h / 6.0 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z),
            st.vs + h / 6.0 * (k1.vs + 2 * k2.vs + 2 * k3.vs + k4.vs),
            st.vz + h / 6.0 * (k1.vz + 2 * k2.vz + 2 * k3.vz + k4.vz)};
}

// Cubic Hermite through (p0, m0*h) and (p1, m1*h) at u in [0, 1].
double hermite(double p0, double m0, double p1, double m1, double h, double u) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * h * m0 + (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * h * m1;
}

// Root of the Hermite interpolant of f over a step where f(0) and f(1)
// bracket `level`.
double hermite_root(double f0, double df0, double f1, double df1, double h, double level) {
    double lo = 0.0;
    double hi = 1.0;
    const bool rising = f1 > f0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = hermite(f0, df0, f1, df1, h, mid) - level;
        if ((v < 0) == rising) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void check_launch(const LaunchState& launch, double dt) {
    if (!(launch.speed > 0.0) || !std::isfinite(launch.speed)) {
        throw InvalidInput(fmt::format("launch speed must be positive, got {}", launch.speed));
    }
    if (!(dt > 0.0 && dt <= 0.01)) {
        throw InvalidInput(fmt::format("integration step must lie in (0, 0.01], got {}", dt));
    }
    if (launch.release_height < 0.0 || launch.drag_coefficient < 0.0) {
        throw InvalidInput("release height and drag coefficient must be non-negative");
    }
}

constexpr double kMaxFlightTime = 600.0;

template <typename OnStep>
LandingPoint fly(const LaunchState& launch, std::optional<double> wall_distance, double dt, OnStep&& on_step) {
    check_launch(launch, dt);
    const double ca = std::cos(launch.azimuth);
    const double sa = std::sin(launch.azimuth);
    const double k = launch.drag_coefficient;
    State st{0.0, launch.release_height, launch.speed * std::cos(launch.elevation),
             launch.speed * std::sin(launch.elevation)};
    LandingPoint out;
    double t = 0.0;
    on_step(t, st, false);
    for (long step = 1;; ++step) {
        const State next = rk4(st, dt, k);
        const double t_next = static_cast<double>(step) * dt;
        const bool lands = next.z < 0.0;
        const double u_land = lands ? hermite_root(st.z, st.vz, next.z, next.vz, dt, 0.0) : 1.0;
        if (wall_distance && !out.wall && st.s < *wall_distance && next.s >= *wall_distance) {
            const double u = hermite_root(st.s, st.vs, next.s, next.vs, dt, *wall_distance);
            if (u <= u_land) {
                out.wall = WallImpact{hermite(st.z, st.vz, next.z, next.vz, dt, u),
                                      *wall_distance * std::tan(launch.azimuth)};
            }
        }
        if (lands) {
            const double s_land = hermite(st.s, st.vs, next.s, next.vs, dt, u_land);
            out.flight_time = t + u_land * dt;
            out.x = s_land * ca;
            out.y = s_land * sa;
            on_step(out.flight_time,
                    State{s_land, 0.0, st.vs + u_land * (next.vs - st.vs), st.vz + u_land * (next.vz - st.vz)}, true);
            return out;
        }
        st = next;
        t = t_next;
        on_step(t, st, false);
        if (t > kMaxFlightTime) {
            throw InvalidInput("flight did not land within the time limit");
        }
    }
}

}  // namespace

LandingPoint integrate_flight(const LaunchState& launch, std::optional<double> wall_distance, double dt) {
    return fly(launch, wall_distance, dt, [](double, const State&, bool) {});
}

std::vector<TrajectorySample> sample_trajectory(const LaunchState& launch, double dt, int stride) {
    stride = std::max(stride, 1);
    const double ca = std::cos(launch.azimuth);
    const double sa = std::sin(launch.azimuth);
    std::vector<TrajectorySample> out;
    long n = 0;
    fly(launch, std::nullopt, dt, [&](double t, const State& st, bool landed) {
        if (landed || n++ % stride == 0) {
            out.push_back({t, st.s * ca, st.s * sa, st.z, st.vs * ca, st.vs * sa, st.vz});
        }
    });
    return out;
}

double predict_range(const RangeObservation& obs, double efficiency, double drag, const FitOptions& opt, double dt) {
    BowModel bow = opt.bow;
    bow.efficiency = efficiency;
    LaunchState l;
    l.speed = launch_speed(bow, obs.draw_length);
    l.elevation = obs.roll;
    l.azimuth = 0.0;
    l.release_height = opt.release_height;
    l.drag_coefficient = drag;
    return integrate_flight(l, std::nullopt, dt).distance();
}

namespace {

double sse(const std::vector<RangeObservation>& obs, double eta, double kd, const FitOptions& opt, double dt) {
    double acc = 0.0;
    for (const auto& o : obs) {
        const double r = predict_range(o, eta, kd, opt, dt) - o.range;
        acc += r * r;
    }
    return acc;
}

}  // namespace

FitResult fit_effective_parameters(const std::vector<RangeObservation>& observations, const FitOptions& opt) {
    const std::size_t free_params = opt.fixed_drag ? 1 : 2;
    if (observations.size() < free_params) {
        throw InvalidInput(fmt::format("need at least {} observations to fit {} parameter(s), got {}", free_params,
                                       free_params, observations.size()));
    }
    for (const auto& o : observations) {
        if (!(o.range > 0) || o.draw_length <= opt.bow.brace_distance) {
            throw InvalidInput("observations need a positive range and a draw length past brace");
        }
    }
    if (opt.fixed_drag && *opt.fixed_drag < 0.0) {
        throw InvalidInput("fixed drag coefficient must be non-negative");
    }

    constexpr double eta_lo = 0.3, eta_hi = 1.0, eta_step = 0.01;
    constexpr double kd_lo = 0.0, kd_hi = 0.02, kd_step = 2.5e-4;
    const int n_eta = static_cast<int>(std::lround((eta_hi - eta_lo) / eta_step)) + 1;
    const int n_kd = opt.fixed_drag ? 1 : static_cast<int>(std::lround((kd_hi - kd_lo) / kd_step)) + 1;

    double best_eta = eta_lo;
    double best_kd = opt.fixed_drag.value_or(kd_lo);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_eta; ++i) {
        const double eta = eta_lo + i * eta_step;
        for (int j = 0; j < n_kd; ++j) {
            const double kd = opt.fixed_drag ? *opt.fixed_drag : kd_lo + j * kd_step;
            const double v = sse(observations, eta, kd, opt, opt.grid_dt);
            if (v < best) {
                best = v;
                best_eta = eta;
                best_kd = kd;
            }
        }
    }

    // Pattern search at the fine step, starting from the grid optimum.
    best = sse(observations, best_eta, best_kd, opt, opt.dt);
    double h_eta = eta_step;
    double h_kd = opt.fixed_drag ? 0.0 : kd_step;
    while (h_eta > 1e-7) {
        bool moved = false;
        const std::array<std::array<double, 2>, 4> moves{{{h_eta, 0}, {-h_eta, 0}, {0, h_kd}, {0, -h_kd}}};
        for (const auto& m : moves) {
            if (m[0] == 0 && m[1] == 0) continue;
            const double eta = best_eta + m[0];
            const double kd = best_kd + m[1];
            if (eta <= 0.0 || eta > 1.0 || kd < 0.0) continue;
            const double v = sse(observations, eta, kd, opt, opt.dt);
            if (v < best) {
                best = v;
                best_eta = eta;
                best_kd = kd;
                moved = true;
            }
        }
        if (!moved) {
            h_eta *= 0.5;
            h_kd *= 0.5;
        }
    }

    FitResult r;
    r.efficiency = best_eta;
    r.drag_coefficient = best_kd;
    r.sum_squared = best;
    for (const auto& o : observations) {
        const double p = predict_range(o, best_eta, best_kd, opt, opt.dt);
        r.predicted.push_back(p);
        r.residuals.push_back(p - o.range);
    }
    return r;
}

}  // namespace archery
