#include "multitrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multitrack {

double path_delay(const Point2D& tx, const Point2D& p, const Point2D& rx) {
    if (!std::isfinite(tx.x) || !std::isfinite(tx.y) || !std::isfinite(p.x) ||
        !std::isfinite(p.y) || !std::isfinite(rx.x) || !std::isfinite(rx.y)) {
        throw std::invalid_argument("path_delay: non-finite point");
    }
    return (distance(tx, p) + distance(p, rx)) / kSpeedOfLight;
}

double doppler_shift(const ReflectorState& reflector, const LinkGeometry& link,
                     double carrier_freq) {
    if (carrier_freq < 5.17e9 || carrier_freq > 5.84e9) {
        throw std::invalid_argument("doppler_shift: carrier outside the 5 GHz band");
    }
    // d/dt (|tx-p| + |p-rx|) = (unit(p-tx) + unit(p-rx)) . v
    const Vec2 ut = (reflector.position - link.tx).unit();
    const Vec2 ur = (reflector.position - link.rx).unit();
    const double path_rate = (ut + ur).dot(reflector.velocity);
    return -(carrier_freq / kSpeedOfLight) * path_rate;
}

// ---------------------------------------------------------------------------
// Activity kinematics
// ---------------------------------------------------------------------------

ActivityClass::ActivityClass(std::string name, std::vector<LimbMotion> limbs)
    : name_(std::move(name)), limbs_(std::move(limbs)) {}

const std::vector<std::string>& ActivityClass::names() {
    static const std::vector<std::string> kNames = {
        "sit_up", "squat", "lunge", "spinal_balance", "bicycle_crunch", "toe_touch_crunch"};
    return kNames;
}

namespace {
constexpr double kPi = M_PI;

// Torso first, then limbs. Amplitudes are range projections of the body
// motion; rest offsets keep |base| + amplitude below the 0.6 m secondary cap.
ActivityClass make_class(const std::string& name) {
    using L = LimbMotion;
    if (name == "sit_up") {
        return {name,
                {L{{0.0, 0.0}, 0.30, 2.0, 0.0},
                 L{{0.20, 0.00}, 0.35, 2.0, 0.0}}};
    }
    if (name == "squat") {
        return {name,
                {L{{0.0, 0.0}, 0.40, 1.2, 0.0},
                 L{{0.20, 0.15}, 0.15, 1.2, 0.0},
                 L{{0.20, -0.15}, 0.15, 1.2, 0.0}}};
    }
    if (name == "lunge") {
        return {name,
                {L{{0.0, 0.0}, 0.50, 1.6, 0.0},
                 L{{0.25, 0.10}, 0.30, 1.6, kPi / 2.0}}};
    }
    if (name == "spinal_balance") {
        return {name,
                {L{{0.0, 0.0}, 0.10, 2.4, 0.0},
                 L{{0.15, 0.20}, 0.40, 2.4, 0.0},
                 L{{-0.15, -0.20}, 0.40, 2.4, kPi}}};
    }
    if (name == "bicycle_crunch") {
        return {name,
                {L{{0.0, 0.0}, 0.15, 0.8, 0.0},
                 L{{0.15, 0.20}, 0.35, 0.8, 0.0},
                 L{{0.15, -0.20}, 0.35, 0.8, kPi}}};
    }
    if (name == "toe_touch_crunch") {
        return {name,
                {L{{0.0, 0.0}, 0.25, 1.4, 0.0},
                 L{{0.10, 0.00}, 0.45, 1.4, 0.0},
                 L{{0.15, 0.15}, 0.20, 1.4, kPi / 2.0}}};
    }
    throw std::invalid_argument("unknown activity class: " + name);
}
}  // namespace

ActivityClass ActivityClass::by_name(const std::string& name) { return make_class(name); }

ActivityClass ActivityClass::unknown_background() {
    // Deliberately off-library: slow 3.0 s cycle, no matching period in the set.
    return {"unknown_background",
            {LimbMotion{{0.0, 0.0}, 0.35, 3.0, 0.0},
             LimbMotion{{0.20, 0.20}, 0.30, 3.0, kPi / 2.0}}};
}

std::vector<Vec2> ActivityClass::offsets(double t) const {
    std::vector<Vec2> out;
    out.reserve(limbs_.size());
    for (const LimbMotion& limb : limbs_) {
        out.push_back(limb.base + Vec2{limb.displacement(t), 0.0});
    }
    return out;
}

std::vector<Vec2> activity_kinematics(const ActivityClass& cls, double t) {
    return cls.offsets(t);
}

// ---------------------------------------------------------------------------
// Users and scenarios
// ---------------------------------------------------------------------------

Point2D UserModel::position(double t) const {
    if (waypoint_t.empty()) return {0.0, 0.0};
    if (t <= waypoint_t.front()) return waypoint_p.front();
    if (t >= waypoint_t.back()) return waypoint_p.back();
    auto it = std::upper_bound(waypoint_t.begin(), waypoint_t.end(), t);
    size_t i = static_cast<size_t>(it - waypoint_t.begin());
    double t0 = waypoint_t[i - 1], t1 = waypoint_t[i];
    double a = (t - t0) / (t1 - t0);
    return waypoint_p[i - 1] + (waypoint_p[i] - waypoint_p[i - 1]) * a;
}

void Scenario::validate() const {
    if (room_max.x <= room_min.x || room_max.y <= room_min.y) {
        throw std::invalid_argument("scenario: degenerate room bounds");
    }
    if (duration <= 0.0) throw std::invalid_argument("scenario: duration must be positive");
    if (users.size() > 4) throw std::invalid_argument("scenario: at most 4 users supported");
    for (size_t i = 0; i < links.size(); ++i) {
        if ((links[i].tx - links[i].rx).norm() == 0.0) {
            throw std::invalid_argument("scenario: link tx == rx");
        }
        for (size_t j = i + 1; j < links.size(); ++j) {
            if (links[i].link_id == links[j].link_id) {
                throw std::invalid_argument("scenario: duplicate link_id " + links[i].link_id);
            }
        }
    }
    for (const UserModel& u : users) {
        if (u.waypoint_t.size() != u.waypoint_p.size() || u.waypoint_t.empty()) {
            throw std::invalid_argument("scenario: user " + u.user_id + " has no trajectory");
        }
        for (size_t i = 1; i < u.waypoint_t.size(); ++i) {
            double dt = u.waypoint_t[i] - u.waypoint_t[i - 1];
            if (dt <= 0.0) {
                throw std::invalid_argument("scenario: non-increasing waypoint times");
            }
            double speed = (u.waypoint_p[i] - u.waypoint_p[i - 1]).norm() / dt;
            if (speed > 2.0 + 1e-9) {
                throw std::invalid_argument("scenario: user " + u.user_id +
                                            " exceeds 2 m/s between waypoints");
            }
        }
        if (u.secondaries.empty() || u.secondaries.size() > 6) {
            throw std::invalid_argument("scenario: users need 1..6 secondary reflectors");
        }
        for (const SecondarySpec& s : u.secondaries) {
            if (s.base.norm() > 0.6) {
                throw std::invalid_argument("scenario: secondary offset above 0.6 m");
            }
            if (s.reflectivity >= u.reflectivity) {
                throw std::invalid_argument(
                    "scenario: secondary reflectivity must stay below the primary");
            }
        }
        if (u.activity) ActivityClass::by_name(*u.activity);  // name check
    }
}

namespace {

// Positions of every user-attached reflector at time t (no velocities).
void user_positions(const UserModel& u, double t, std::vector<Point2D>& out,
                    std::vector<double>& refl) {
    out.clear();
    refl.clear();
    const Point2D torso = u.position(t);
    const Vec2 hx = u.heading.unit();
    const Vec2 hy{-hx.y, hx.x};
    auto to_world = [&](const Vec2& local) { return torso + hx * local.x + hy * local.y; };

    if (u.activity) {
        const ActivityClass cls = ActivityClass::by_name(*u.activity);
        std::vector<Vec2> off = cls.offsets(t / u.pace);
        out.push_back(to_world(off[0]));
        refl.push_back(u.reflectivity);
        // Limb entries map onto the configured secondaries cyclically.
        size_t nsec = u.secondaries.size();
        for (size_t i = 0; i < nsec; ++i) {
            Vec2 o = (i + 1 < off.size()) ? off[i + 1] : u.secondaries[i].base;
            out.push_back(to_world(o));
            refl.push_back(u.secondaries[i].reflectivity);
        }
    } else {
        out.push_back(torso);
        refl.push_back(u.reflectivity);
        for (const SecondarySpec& s : u.secondaries) {
            out.push_back(to_world(s.base));
            refl.push_back(s.reflectivity);
        }
    }
}

}  // namespace

std::vector<ReflectorState> sample_scenario(const Scenario& s, double t) {
    if (t < 0.0 || t > s.duration) {
        throw std::out_of_range("sample_scenario: t outside [0, duration]");
    }
    const double h = 1e-3;  // central-difference step
    double t0 = std::max(0.0, t - 0.5 * h);
    double t1 = std::min(s.duration, t + 0.5 * h);
    if (t1 <= t0) t1 = t0 + h;  // degenerate scenarios shorter than the stencil

    std::vector<ReflectorState> states;
    std::vector<Point2D> p, pa, pb;
    std::vector<double> refl, tmp;
    for (const UserModel& u : s.users) {
        user_positions(u, t, p, refl);
        user_positions(u, t0, pa, tmp);
        user_positions(u, t1, pb, tmp);
        for (size_t i = 0; i < p.size(); ++i) {
            ReflectorState st;
            st.position = p[i];
            st.reflectivity = refl[i];
            st.velocity = (pb[i] - pa[i]) * (1.0 / (t1 - t0));
            st.kind = (i == 0) ? ReflectorKind::Primary : ReflectorKind::Secondary;
            st.user_id = u.user_id;
            states.push_back(st);
        }
    }
    for (const ReflectorState& st : s.static_reflectors) {
        ReflectorState c = st;
        c.velocity = {0.0, 0.0};
        c.kind = ReflectorKind::Static;
        states.push_back(c);
    }
    return states;
}

}  // namespace multitrack
