#pragma once

// Unit conventions: all library-internal quantities are SI
// (seconds, metres, square metres, cubic metres per second).
// File formats and CSV outputs use hydrologist-friendly units
// (hours, millimetres, square kilometres, litres per second).

namespace riverflow::units {

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kM2PerKm2 = 1.0e6;
inline constexpr double kMPerMm = 1.0e-3;
inline constexpr double kLpsPerM3s = 1.0e3;

inline constexpr double hours_to_seconds(double h) { return h * kSecondsPerHour; }
inline constexpr double seconds_to_hours(double s) { return s / kSecondsPerHour; }
inline constexpr double per_hour_to_per_second(double r) { return r / kSecondsPerHour; }
inline constexpr double per_second_to_per_hour(double r) { return r * kSecondsPerHour; }
inline constexpr double km2_to_m2(double a) { return a * kM2PerKm2; }
inline constexpr double m2_to_km2(double a) { return a / kM2PerKm2; }
inline constexpr double mm_to_m(double d) { return d * kMPerMm; }
inline constexpr double m_to_mm(double d) { return d / kMPerMm; }
inline constexpr double m3s_to_lps(double q) { return q * kLpsPerM3s; }
inline constexpr double lps_to_m3s(double q) { return q / kLpsPerM3s; }

}  // namespace riverflow::units
