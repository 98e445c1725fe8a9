#pragma once

#include <array>
#include <string_view>

namespace cstm::testing {

// Standard-of-care trace, time-independent model, cycles 0-5 (H, S1, S2, D).
inline constexpr std::array<std::array<double, 4>, 6> kPrintedTrace{{
    {1.000, 0.000, 0.000, 0.000},
    {0.848, 0.150, 0.000, 0.002},
    {0.794, 0.186, 0.016, 0.005},
    {0.766, 0.192, 0.035, 0.008},
    {0.745, 0.190, 0.054, 0.011},
    {0.726, 0.186, 0.073, 0.015},
}};

// Standard-of-care transition matrix at cycle 0, age-dependent model.
inline constexpr std::array<std::array<double, 4>, 4> kPrintedCycle0Matrix{{
    {0.8489865, 0.1500000, 0.0000000, 0.001013486},
    {0.5000000, 0.3919626, 0.1050000, 0.003037378},
    {0.0000000, 0.0000000, 0.9899112, 0.010088764},
    {0.0000000, 0.0000000, 0.0000000, 1.000000000},
}};

// Strategy A cost matrix at cycle 0.
inline constexpr std::array<std::array<double, 4>, 4> kPrintedStrategyACosts{{
    {2000, 17000, 27000, 2000},
    {2000, 16000, 27000, 2000},
    {2000, 16000, 27000, 2000},
    {2000, 16000, 27000, 0},
}};

struct PrintedOutcome {
  std::string_view strategy;
  double cost;
  double effect;
};

// State rewards only.
inline constexpr std::array<PrintedOutcome, 4> kPrintedStateTotals{{
    {"SoC", 112444, 19.490},
    {"A", 210019, 20.192},
    {"B", 193403, 20.778},
    {"AB", 281871, 21.599},
}};

// State and transition rewards.
inline constexpr std::array<PrintedOutcome, 4> kPrintedCeaTotals{{
    {"SoC", 115275, 19.468},
    {"A", 212851, 20.170},
    {"B", 196408, 20.754},
    {"AB", 284877, 21.575},
}};

inline constexpr double kPrintedIcerB = 63090;
inline constexpr double kPrintedIcerAB = 107757;
inline constexpr double kPrintedLifeExpectancy = 41.2;
inline constexpr double kPrintedEvpiAt100k = 5162;

}  // namespace cstm::testing
