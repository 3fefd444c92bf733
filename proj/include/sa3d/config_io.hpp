// config_io.hpp - JSON design configuration files.
//
//   {
//     "arch":        {"d0_i": 64, "d0_j": 32, "d0_k": 2, "d_p": 2},
//     "clock":       {"fmax_mhz": 398},
//     "memory":      {"bank_mb_s": 19200, "efficiency": 1.0, "lsu_pow2": true},
//     "blocking":    {"d1_i": 512, "d1_j": 512},          // optional override
//     "problem":     {"d2_i": 512, "d2_j": 512, "d2_k": 512},
//     "latency":     {"l_mac": 6, "l_dot": {"1": 6, "2": 8, "4": 11, "8": 15}},
//     "constraints": {"dsp_budget": 4713, "max_dp": 8}
//   }
//
// Only "arch" is mandatory. Unknown keys are rejected.
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>

#include "sa3d/core_model.hpp"

namespace sa3d {

struct Constraints {
    std::optional<Count> dsp_budget;
    std::optional<Count> max_dp;   // dot units larger than this are marked infeasible
    bool operator==(const Constraints&) const = default;
};

struct DesignConfig {
    ArchShape shape;
    ClockSpec clock;
    MemorySpec mem;
    std::optional<std::pair<Count, Count>> d1_override;
    std::optional<ProblemShape> problem;
    LatencyProfile lat;
    Constraints constraints;

    bool operator==(const DesignConfig&) const = default;
};

DesignConfig parse_config(const std::string& json_text);
std::string to_config_text(const DesignConfig& cfg);

DesignConfig load_config(const std::filesystem::path& path);
void save_config(const DesignConfig& cfg, const std::filesystem::path& path);

}  // namespace sa3d
