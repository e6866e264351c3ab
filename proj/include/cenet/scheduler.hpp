#pragma once

#include <cstdint>

namespace cenet {

/// Cosine annealing from lr_max to lr_min over `total_steps`, optionally
/// restarted `cycles` times (each cycle spans total_steps / cycles steps).
/// lr(step >= total_steps) = lr_min.
class LrSchedule {
public:
    LrSchedule(double lr_max, double lr_min, std::int64_t total_steps, int cycles = 1);

    double at(std::int64_t step) const;
    std::int64_t total_steps() const { return total_steps_; }
    std::int64_t cycle_steps() const { return cycle_steps_; }

private:
    double lr_max_;
    double lr_min_;
    std::int64_t total_steps_;
    std::int64_t cycle_steps_;
};

}  // namespace cenet
