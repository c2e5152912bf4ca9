#include "archery/geometry.hpp"

#include <fmt/format.h>

#include "archery/error.hpp"

namespace archery {

bool AimState::valid() const {
    return std::isfinite(theta) && std::isfinite(phi) && std::isfinite(draw_length) && draw_length >= 0.0 &&
           std::abs(theta) <= std::numbers::pi && std::abs(phi) <= std::numbers::pi / 2.0;
}

AimState AimState::make(double theta, double phi, double draw_length) {
    AimState aim{theta, phi, draw_length};
    if (!aim.valid()) {
        throw InvalidInput(fmt::format("invalid aim (theta={}, phi={}, draw_length={})", theta, phi, draw_length));
    }
    return aim;
}

Vec3 draw_delta(const AimState& aim) {
    const double d = aim.draw_length;
    return {std::sin(aim.theta) * d, std::cos(aim.theta) * std::cos(aim.phi) * d, std::sin(-aim.phi) * d};
}

Vec3 right_gripper_target(const Vec3& left_pos, const AimState& aim) {
    return left_pos + draw_delta(aim);
}

}  // namespace archery
