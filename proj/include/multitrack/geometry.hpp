#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace multitrack {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double px, double py) : x(px), y(py) {}

    constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    friend constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }
    constexpr double dot(const Vec2& r) const { return x * r.x + y * r.y; }
    double norm() const { return std::hypot(x, y); }
    Vec2 unit() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
};

using Point2D = Vec2;

inline double distance(const Point2D& a, const Point2D& b) { return (a - b).norm(); }

struct LinkGeometry {
    Point2D tx;
    Point2D rx;
    std::string link_id;
};

enum class ReflectorKind { Primary, Secondary, Static };

struct ReflectorState {
    Point2D position;
    double reflectivity = 1.0;  // dimensionless amplitude, >= 0
    Vec2 velocity;              // m/s
    ReflectorKind kind = ReflectorKind::Static;
    std::string user_id;        // empty for static reflectors
};

// One oscillating body part: a fixed offset from the torso in the user's local
// frame (+x = heading) plus a raised-cosine stroke along the heading axis.
struct LimbMotion {
    Vec2 base;           // rest offset, local frame, meters
    double amplitude;    // stroke length along +x, meters
    double period;       // seconds
    double phase;        // radians
    double displacement(double t) const {
        return amplitude * 0.5 * (1.0 - std::cos(2.0 * M_PI * t / period + phase));
    }
};

// Parametric kinematics for the six supported exercises. Entry 0 of limbs()
// is the torso (primary reflector); the rest drive the secondaries.
class ActivityClass {
  public:
    static const std::vector<std::string>& names();
    static ActivityClass by_name(const std::string& name);  // throws on unknown
    static ActivityClass unknown_background();  // off-library kinematics for robustness tests

    const std::string& name() const { return name_; }
    const std::vector<LimbMotion>& limbs() const { return limbs_; }

    // Offsets in the user's local frame at time t; element 0 is the torso.
    std::vector<Vec2> offsets(double t) const;

    ActivityClass(std::string name, std::vector<LimbMotion> limbs);

  private:
    std::string name_;
    std::vector<LimbMotion> limbs_;
};

std::vector<Vec2> activity_kinematics(const ActivityClass& cls, double t);

struct SecondarySpec {
    Vec2 base;                  // local-frame rest offset, |base| <= 0.6 m
    double reflectivity = 0.3;  // relative amplitude, < primary
};

struct UserModel {
    std::string user_id;
    std::vector<double> waypoint_t;    // strictly increasing
    std::vector<Point2D> waypoint_p;   // same length
    Vec2 heading{1.0, 0.0};            // local +x axis in world coordinates
    double reflectivity = 1.0;         // primary (torso)
    std::vector<SecondarySpec> secondaries;
    std::optional<std::string> activity;  // ActivityClass name
    double pace = 1.0;                    // time scale applied to the activity

    Point2D position(double t) const;  // piecewise linear, clamped at the ends
};

struct Scenario {
    Point2D room_min;
    Point2D room_max;
    std::vector<LinkGeometry> links;
    std::vector<UserModel> users;
    std::vector<ReflectorState> static_reflectors;
    double duration = 0.0;      // seconds
    std::uint64_t seed = 0;
    double los_gain = 1.0;      // < 1 models an attenuated (NLOS-ish) direct path

    void validate() const;  // throws std::invalid_argument on a broken scenario
};

// (|tx-p| + |p-rx|) / c
double path_delay(const Point2D& tx, const Point2D& p, const Point2D& rx);

// Shrinking path => positive shift. carrier_freq must lie in the 5 GHz band.
double doppler_shift(const ReflectorState& reflector, const LinkGeometry& link,
                     double carrier_freq);

// All reflector states at time t: per user the primary then its secondaries,
// then the static reflectors. Velocities by central difference (1 ms step).
std::vector<ReflectorState> sample_scenario(const Scenario& s, double t);

}  // namespace multitrack
