#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egov/engine.hpp"
#include "egov/fixed.hpp"

namespace egov {

// ---------------------------------------------------------------------------
// Scenario 1: prosumer energy dispatch, swarm aggregation, load forecasting.
// ---------------------------------------------------------------------------

struct EnergyConfig {
    Fixed4 dailyNeedKWh = Fixed4::from_int(14);
    Fixed4 minSurplusKWh = Fixed4::from_int(1);  // dispatch trigger = need + minSurplus
    Fixed4 tariff = Fixed4::parse("0.10").value();
    Fixed4 centralFraction = Fixed4::parse("0.7").value();

    Fixed4 trigger() const { return dailyNeedKWh + minSurplusKWh; }

    Value to_value() const;
    static EnergyConfig from_value(const Value& v);
};

inline constexpr const char* kKeyEnergyConfig = "config/energy";
inline constexpr int64_t kMillisPerHour = 3'600'000;
inline constexpr int64_t kMillisPerDay = 86'400'000;

struct MeterReading {
    std::string deviceId;
    int64_t at = 0;
    Fixed4 consumedKWh;
    Fixed4 producedKWh;
    Fixed4 tempC;

    // The body the device key signs.
    Bytes signing_body() const;
    Value to_value() const;  // without signature
    static MeterReading from_value(const Value& v);
};

struct DispatchOrder {
    IdentityId prosumer;
    Fixed4 surplusKWh;
    std::string destination;  // "centralGrid" or "gridPeer:<label>"
    Fixed4 tariff;
    Fixed4 payment;
    int64_t at = 0;
};

std::string key_meter_reading(const IdentityId& prosumer, int64_t at);
std::string key_meter_prefix(const IdentityId& prosumer);
std::string key_device_last(const std::string& deviceId);
std::string key_dispatch(const IdentityId& prosumer, int64_t at);
std::string key_account(const IdentityId& owner);
std::string key_district_aggregate(const std::string& districtId, int64_t at);

// ---------------------------------------------------------------------------
// Push-sum gossip aggregation
// ---------------------------------------------------------------------------

// Decentralized sum estimation: each agent holds (value, weight); every round
// every agent keeps half of its pair and pushes half to a partner chosen by a
// deterministic seeded rotation schedule. Agent i's sum estimate after any
// round is n * x_i / w_i; estimates converge to the exact total.
struct PushSumTrace {
    std::vector<double> estimates;       // final per-agent sum estimates
    std::vector<double> worstErrorByRound;  // max |estimate - truth| per round
};

PushSumTrace push_sum(const std::vector<double>& values, uint64_t seed, int rounds);

struct DistrictAggregate {
    std::string districtId;
    Fixed4 totalSurplusKWh;
    Fixed4 toCentralKWh;
    Fixed4 toTradeKWh;
    int64_t computedAt = 0;
};

// Runs push-sum over the residences' surpluses and splits the rounded total by
// centralFraction: toCentral is rounded half-even, toTrade derived by
// subtraction so the parts always reconstruct the total exactly. Empty
// district -> nullopt.
std::optional<DistrictAggregate> swarm_aggregate(const std::string& districtId,
                                                 const std::vector<Fixed4>& surpluses,
                                                 Fixed4 centralFraction, uint64_t seed,
                                                 int rounds, int64_t at);

// ---------------------------------------------------------------------------
// Load forecasting
// ---------------------------------------------------------------------------

struct LoadForecast {
    std::vector<double> values;  // one per horizon slot
    std::vector<int> peakHours;  // hours-of-day, highest mean first, ties ascending
    bool seasonal = false;       // false = simple-mean fallback
};

// Seasonal-naive forecast: each future slot takes the mean of the same
// hour-of-week over history. Histories shorter than one week fall back to the
// overall mean. peakHours ranks hours-of-day by exact mean comparison.
// Empty history -> Errc::forecast.
LoadForecast forecast_load(const std::vector<Fixed4>& hourlyHistory, size_t horizonHours,
                           int peakCount = 3);

// Registers the energy contract:
//   energy.ingest    {deviceId, at, consumedKWh, producedKWh, tempC, deviceSig}
//   energy.dispatch  {prosumer, at}                  (authority)
//   energy.aggregate {district, total, toCentral, toTrade, at}  (authority)
void register_energy_contracts(ContractRegistry& reg);

}  // namespace egov
