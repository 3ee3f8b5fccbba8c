// Generated by tests/oracles/reference_values.py (mpmath, 60 digits). Do not edit.
#pragma once

#include <array>
#include <cstdint>

namespace oracle {

// Exact pair synapse counts at full scale, [post][pre].
inline constexpr std::array<std::array<std::int64_t, 8>, 8> kFullPairSynapses = {{
    {45499806, 22323577, 20253647, 9670918, 3293578, 0, 2271404, 0},
    {17443694, 5018763, 4105338, 1690074, 2221213, 0, 353461, 0},
    {3503670, 756562, 24482849, 17413576, 714524, 7003, 14624432, 0},
    {8114254, 92832, 9933538, 5223272, 87836, 0, 8810905, 0},
    {10613575, 1817058, 5507804, 151900, 2040738, 2407889, 1438969, 0},
    {1241436, 169424, 607667, 12851, 319602, 430444, 132414, 0},
    {4681225, 556108, 6727570, 1320234, 4112225, 305029, 8372649, 10827677},
    {2260836, 17207, 220033, 8078, 401638, 25218, 2888426, 1354320},
}};

inline constexpr std::int64_t kFullTotalSynapses = 298880970;

inline constexpr std::array<std::int64_t, 8> kSizesK01 = {2068, 583, 2191, 547, 485, 106, 1439, 294};
inline constexpr std::int64_t kTotalK01 = 7713;
inline constexpr std::int64_t kTotalSynapsesK01 = 2988787;
inline constexpr std::array<double, 8> kDcCompensationK01 = {55.07902298171376, 125.90982809396208, 129.57012213781386, 135.33603671110926, 148.16358859027574, 168.20193675557273, 61.869590256901156, 164.65530899404764};
inline constexpr std::array<std::int64_t, 8> kSizesK03 = {6204, 1750, 6574, 1643, 1455, 319, 4318, 884};
inline constexpr std::int64_t kTotalK03 = 23147;
inline constexpr std::int64_t kTotalSynapsesK03 = 26899263;
inline constexpr std::array<double, 8> kDcCompensationK03 = {36.431721575136545, 83.282374166576144, 85.703455846492854, 89.517288826610544, 98.00200357377602, 111.25626048799396, 40.923305537854893, 108.91036275517779};
// Mean input current per neuron at full scale (pA).
inline constexpr std::array<double, 8> kFullMeanInput = {80.551710415123531, 184.14001305742201, 189.49310267109286, 197.925610290929, 216.68558801690722, 245.99117717276995, 90.482747298020146, 240.80432168894166};

// Closed-form LIF period (ms) for constant currents (pA), starting at reset.
inline constexpr std::array<double, 4> kDcCurrents = {400, 500, 750, 1000};
inline constexpr std::array<double, 4> kDcPeriods = {29.725887222397812, 15.862943611198906, 8.9314718055994531, 6.7000362924573555};

}  // namespace oracle
