#pragma once

#include <cmath>

#include "matops.hpp"

namespace cascadecomp {

// One classical Runge-Kutta step for x' = f(t, x).
template<typename F>
[[nodiscard]] Vector rk4_step(F&& f, double t, const Vector& x, double dt) {
    const Vector k1 = f(t, x);
    const Vector k2 = f(t + 0.5 * dt, Vector(x + 0.5 * dt * k1));
    const Vector k3 = f(t + 0.5 * dt, Vector(x + 0.5 * dt * k2));
    const Vector k4 = f(t + dt, Vector(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Number of fixed steps of size dt covering [0, horizon]; the last step may
// not be shortened, so horizon/dt is rounded to the nearest integer.
[[nodiscard]] inline long step_count(double horizon, double dt) {
    return static_cast<long>(std::llround(horizon / dt));
}

} // namespace cascadecomp
