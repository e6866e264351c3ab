#include "cenet/scheduler.hpp"

#include <cmath>
#include <numbers>

#include "cenet/error.hpp"

namespace cenet {

LrSchedule::LrSchedule(double lr_max, double lr_min, std::int64_t total_steps, int cycles)
    : lr_max_(lr_max), lr_min_(lr_min), total_steps_(total_steps) {
    if (total_steps < 1 || cycles < 1 || total_steps % cycles != 0)
        throw ConfigError("lr schedule: total_steps must be a positive multiple of cycles");
    cycle_steps_ = total_steps / cycles;
}

double LrSchedule::at(std::int64_t step) const {
    if (step >= total_steps_) return lr_min_;
    if (step < 0) step = 0;
    const double t = static_cast<double>(step % cycle_steps_) / static_cast<double>(cycle_steps_);
    return lr_min_ + 0.5 * (lr_max_ - lr_min_) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace cenet
