#pragma once

#include <cstddef>

namespace cola::ode {

/// One classical fourth-order Runge-Kutta step of y' = f(t, y).
template <class F, class State>
State rk4_step(F&& f, double t, const State& y, double h)
{
    const State k1 = f(t, y);
    const State k2 = f(t + h / 2, y + (h / 2) * k1);
    const State k3 = f(t + h / 2, y + (h / 2) * k2);
    const State k4 = f(t + h, y + h * k3);
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Fixed-step RK4 from t0 to t1 in `steps` equal steps (t1 < t0 allowed).
template <class F, class State>
State integrate_rk4(F&& f, double t0, State y, double t1, std::size_t steps)
{
    if (steps == 0 || t0 == t1)
        return y;
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i)
        y = rk4_step(f, t0 + static_cast<double>(i) * h, y, h);
    return y;
}

} // namespace cola::ode
