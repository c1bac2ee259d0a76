#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ereg/control.hpp"
#include "ereg/errors.hpp"
#include "generators.hpp"

using namespace ereg;
using namespace ereg::control;
using doctest::Approx;

namespace {

FeedforwardParams tank_ff() {
  FeedforwardParams ff;
  ff.gamma = 60.0;
  ff.theta_zero = 10.0;
  return ff;
}

FeedforwardParams injector_ff() {
  FeedforwardParams ff;
  ff.nominal_flow = 1.0e-3;
  ff.fluid_density = 1141.0;
  ff.alpha = 4.0e-6;
  ff.theta_zero = 10.0;
  return ff;
}

EregController tank_controller() {
  return EregController::make(EregKind::tank, {60e-5, 100e-5, 0.0}, {0.14, 0.0, 0.0}, {14.0},
                              tank_ff());
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("pid_step: zero error gives zero output") {
  PidState s;
  for (int i = 0; i < 100; ++i) {
    const PidResult r = pid_step({1.0, 2.0, 3.0}, s, 5.0, 5.0, 0.01);
    CHECK(r.output == 0.0);
    s = r.state;
  }
}

TEST_CASE("pid_step: pure proportional") {
  CHECK(pid_step({3.0, 0.0, 0.0}, {}, 2.0, 0.0, 0.01).output == 6.0);
}

TEST_CASE("pid_step: rectangular integration of a constant error") {
  const double ki = 0.7, e = 1.5, dt = 0.01;
  PidState s;
  double out = 0.0;
  const int n = 250;
  for (int i = 0; i < n; ++i) {
    const PidResult r = pid_step({0.0, ki, 0.0}, s, e, 0.0, dt);
    out = r.output;
    s = r.state;
  }
  CHECK(out == Approx(ki * e * n * dt).epsilon(1e-12));
}

TEST_CASE("pid_step: rejects non-finite inputs and bad dt") {
  CHECK_THROWS_AS(pid_step({1, 0, 0}, {}, std::nan(""), 0.0, 0.01), ControllerError);
  CHECK_THROWS_AS(pid_step({1, 0, 0}, {}, 0.0, std::numeric_limits<double>::infinity(), 0.01),
                  ControllerError);
  CHECK_THROWS_AS(pid_step({1, 0, 0}, {}, 0.0, 0.0, 0.0), ControllerError);
  CHECK_THROWS_AS(pid_step({1, 0, 0}, {}, 0.0, 0.0, -1.0), ControllerError);
}

TEST_CASE("pid_step property: output and integral respect their limits") {
  testing::Gen g(21);
  for (int trial = 0; trial < 100; ++trial) {
    PidState s;
    s.output_limits = {g.uniform(-10.0, 0.0), g.uniform(0.0, 10.0)};
    s.integral_limits = {-g.uniform(0.0, 5.0), g.uniform(0.0, 5.0)};
    const PidGains k{g.uniform(0, 5), g.uniform(0, 5), g.uniform(0, 1)};
    for (int i = 0; i < 200; ++i) {
      const PidResult r = pid_step(k, s, g.uniform(-100, 100), g.uniform(-100, 100), 0.01);
      CHECK(s.output_limits.contains(r.output));
      CHECK(s.integral_limits.contains(r.state.integral));
      s = r.state;
    }
  }
}

TEST_CASE("pid_step: anti-windup freezes the integral while saturated") {
  PidState s;
  s.output_limits = {0.0, 90.0};
  s.integral = 5.0;
  testing::Gen g(22);
  for (int i = 0; i < 500; ++i) {
    const double before = s.integral;
    const PidResult r = pid_step({10.0, 5.0, 0.0}, s, 100.0, g.uniform(0.0, 50.0), 0.01);
    CHECK(r.output == 90.0);
    CHECK(r.state.integral <= before);
    s = r.state;
  }
  // Unwinding starts as soon as the error changes sign.
  const PidResult back = pid_step({10.0, 5.0, 0.0}, s, 0.0, 0.1, 0.01);
  CHECK(back.state.integral < s.integral);
}

TEST_CASE("pid_step: setpoint steps do not kick the derivative") {
  const PidGains k{0.0, 0.0, 2.0};
  PidState s;
  for (int i = 0; i < 10; ++i) s = pid_step(k, s, 1.0, 3.0, 0.01).state;
  const PidResult stepped = pid_step(k, s, 50.0, 3.0, 0.01);
  CHECK(stepped.output == 0.0);
  const PidResult moved = pid_step(k, s, 1.0, 3.5, 0.01);
  CHECK(moved.output < 0.0);
}

TEST_CASE("pid_step: bias sits inside the clamp") {
  PidState s;
  s.output_limits = {0.0, 90.0};
  CHECK(pid_step({1.0, 0.0, 0.0}, s, 0.0, 0.0, 0.01, 30.0).output == 30.0);
  CHECK(pid_step({1.0, 0.0, 0.0}, s, 100.0, 0.0, 0.01, 30.0).output == 90.0);
}

TEST_CASE("pid_step: identical input sequences are bit-identical") {
  testing::Gen g(23);
  std::vector<double> sp, meas;
  for (int i = 0; i < 1000; ++i) {
    sp.push_back(g.uniform(-10, 10));
    meas.push_back(g.uniform(-10, 10));
  }
  auto run = [&] {
    PidState s;
    s.output_limits = {-5.0, 5.0};
    std::vector<double> out;
    for (std::size_t i = 0; i < sp.size(); ++i) {
      const PidResult r = pid_step({0.3, 0.2, 0.01}, s, sp[i], meas[i], 0.001);
      out.push_back(r.output);
      s = r.state;
    }
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("dynamic_gains ramps linearly then holds") {
  const PidGains base{2.0, 4.0, 6.0};
  const RampSchedule ramp{10.0};
  const PidGains zero = dynamic_gains(base, 0.0, ramp);
  CHECK(zero.kp == 0.0);
  CHECK(zero.ki == 0.0);
  CHECK(zero.kd == 0.0);
  const PidGains half = dynamic_gains(base, 5.0, ramp);
  CHECK(half.kp == 1.0);
  CHECK(half.ki == 2.0);
  CHECK(half.kd == 3.0);
  for (double t : {10.0, 11.0, 1e6}) {
    const PidGains full = dynamic_gains(base, t, ramp);
    CHECK(full.kp == base.kp);
    CHECK(full.ki == base.ki);
    CHECK(full.kd == base.kd);
  }
  testing::Gen g(24);
  for (int i = 0; i < 200; ++i) {
    const double t = g.uniform(0.0, 10.0);
    CHECK(dynamic_gains(base, t, ramp).kp == Approx(base.kp * t / 10.0).epsilon(1e-15));
  }
}

TEST_CASE("ff_tank: saturation, half ratio and nominal pressures") {
  const FeedforwardParams ff = tank_ff();
  CHECK(ff_tank(ff, 42e5, 42e5) == 70.0);
  CHECK(ff_tank(ff, 50e5, 42e5) == 70.0);
  CHECK(ff_tank(ff, 42e5, 84e5) == 40.0);
  CHECK(ff_tank(ff, 42e5, 310e5) == Approx(60.0 * 42.0 / 310.0 + 10.0));
  CHECK(ff_tank(ff, 42e5, 310e5) == Approx(18.13).epsilon(1e-3));

  FeedforwardParams big = ff;
  big.gamma = 200.0;
  CHECK(ff_tank(big, 42e5, 42e5) == 90.0);
}

TEST_CASE("ff_tank property: ratio invariance and monotonicity") {
  const FeedforwardParams ff = tank_ff();
  testing::Gen g(25);
  for (int i = 0; i < 500; ++i) {
    const double s = g.uniform(2e5, 60e5);
    const double p = g.uniform(2e5, 400e5);
    const double c = g.uniform(0.1, 10.0);
    CHECK(ff_tank(ff, c * s, c * p) == Approx(ff_tank(ff, s, p)).epsilon(1e-12));
    CHECK(ff_tank(ff, s, p * 1.1) <= ff_tank(ff, s, p));
    CHECK(ff_tank(ff, s * 1.1, p) >= ff_tank(ff, s, p));
    const double v = ff_tank(ff, s, p);
    CHECK(v >= ff.theta_zero);
    CHECK(v <= ff.gamma + ff.theta_zero);
  }
}

TEST_CASE("ff_injector: formula, limit and singular branch") {
  const FeedforwardParams ff = injector_ff();
  CHECK(ff_injector(ff, 42e5, 35e5) == Approx(20.1).epsilon(1e-3));
  CHECK(ff_injector(ff, 1e12, 1e5) == Approx(10.0).epsilon(1e-3));
  CHECK(ff_injector(ff, 1e12, 1e5) > 10.0);
  CHECK(ff_injector(ff, 42e5, 42e5) == 90.0);
  CHECK(ff_injector(ff, 42e5, 41.95e5) == 90.0);
  CHECK(ff_injector(ff, 42e5, 41.9e5) == 90.0);
  CHECK(ff_injector(ff, 42e5, 45e5) == 90.0);
  CHECK(ff_injector(ff, 42e5, 41.8e5) < 90.0);
}

TEST_CASE("actuator: rest, saturation and the closed-form ramp") {
  const ActuatorParams p;
  ActuatorState a;
  a.angle = 37.0;
  CHECK(actuator_step(a, 0.0, 0.01, p).angle == 37.0);

  ActuatorState full;
  for (int i = 0; i < 2000; ++i) full = actuator_step(full, 1.0, 1e-3, p);
  CHECK(full.angle == 90.0);
  CHECK(full.angular_rate == 0.0);

  ActuatorState low;
  low.angle = 5.0;
  for (int i = 0; i < 2000; ++i) low = actuator_step(low, -1.0, 1e-3, p);
  CHECK(low.angle == 0.0);
  CHECK(low.angular_rate == 0.0);

  ActuatorState ramp;
  for (int i = 0; i < 100; ++i) ramp = actuator_step(ramp, 1.0, 1e-3, p);
  const double closed = 180.0 * (0.1 - 0.02 * (1.0 - std::exp(-5.0)));
  CHECK(ramp.angle == Approx(closed).epsilon(1e-9));
  CHECK(ramp.angle == Approx(14.424).epsilon(1e-4));

  // Independent fine-step integration of the same first-order motor.
  double rate = 0.0, angle = 0.0;
  const double h = 1e-6;
  for (int i = 0; i < 100000; ++i) {
    angle += rate * h;
    rate += (180.0 - rate) / 0.02 * h;
  }
  CHECK(angle == Approx(closed).epsilon(1e-4));
}

TEST_CASE("actuator property: angle stays within the stops") {
  testing::Gen g(26);
  ActuatorState a;
  for (int i = 0; i < 20000; ++i) {
    a = actuator_step(a, g.uniform(-3.0, 3.0), g.uniform(1e-4, 0.05));
    CHECK(a.angle >= 0.0);
    CHECK(a.angle <= 90.0);
    CHECK(std::abs(a.command) <= 1.0);
  }
}

TEST_CASE("drivetrain backlash and quantization") {
  Drivetrain d{10.0, 2.0};
  CHECK(d.measure(12.34) == Approx(12.3));
  CHECK(d.valve_angle(10.5, 10.0) == 10.0);
  CHECK(d.valve_angle(12.0, 10.0) == 11.0);
  CHECK(d.valve_angle(8.0, 10.0) == 9.0);
  Drivetrain ideal;
  CHECK(ideal.measure(12.34) == 12.34);
  CHECK(ideal.valve_angle(12.34, 0.0) == 12.34);
}

TEST_CASE("ereg_step: feedforward only with zero gains") {
  EregController c = EregController::make(EregKind::tank, {}, {0.14, 0, 0}, {1.0}, tank_ff());
  const EregStepResult r = ereg_step(c, 40e5, 310e5, 42e5, 5.0, 0.01);
  CHECK(r.controller.u1 == ff_tank(tank_ff(), 42e5, 310e5));
}

TEST_CASE("ereg_step: zero error leaves u1 at the feedforward") {
  const EregController c = tank_controller();
  const EregStepResult r = ereg_step(c, 42e5, 310e5, 42e5, 20.0, 0.01);
  CHECK(r.controller.u1 == ff_tank(tank_ff(), 42e5, 310e5));
  CHECK(r.u2 == std::min(1.0, 0.14 * r.controller.u1));
}

TEST_CASE("ereg_step property: u1 and u2 bounded for arbitrary inputs") {
  testing::Gen g(27);
  EregController c = tank_controller();
  for (int i = 0; i < 5000; ++i) {
    const EregStepResult r = ereg_step(c, g.uniform(0, 100e5), g.uniform(1e5, 400e5),
                                       g.uniform(1e5, 60e5), i * 0.01, 0.01);
    CHECK(r.controller.u1 >= 0.0);
    CHECK(r.controller.u1 <= 90.0);
    CHECK(std::abs(r.u2) <= 1.0);
    c = r.controller;
    c.actuator = actuator_step(c.actuator, r.u2, 0.01);
  }
}

TEST_CASE("feedback disabled: u1 traces the feedforward every tick") {
  EregController c = tank_controller();
  c.feedback_enabled = false;
  testing::Gen g(28);
  for (int i = 0; i < 1000; ++i) {
    const double up = g.uniform(50e5, 310e5);
    const double sp = g.uniform(30e5, 45e5);
    c = primary_step(c, g.uniform(0, 60e5), up, sp, sp, i * 0.01, 0.01);
    CHECK(c.u1 == ff_tank(tank_ff(), sp, up));
  }
}

TEST_CASE("injector controller uses the injector feedforward") {
  EregController c = EregController::make(EregKind::injector, {}, {0.14, 0, 0}, {1.0},
                                          injector_ff());
  c = primary_step(c, 30e5, 42e5, 35e5, 35e5, 1.0, 0.01);
  CHECK(c.u1 == ff_injector(injector_ff(), 42e5, 35e5));
  c.use_feedforward = false;
  c = primary_step(c, 35e5, 42e5, 35e5, 35e5, 1.0, 0.01);
  CHECK(c.last_feedforward == 0.0);
}

}  // TEST_SUITE
