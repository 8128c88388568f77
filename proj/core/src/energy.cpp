#include "egov/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace egov {

Value EnergyConfig::to_value() const {
    Value::Map m;
    m.emplace("centralFraction", Value(centralFraction.raw()));
    m.emplace("dailyNeedKWh", Value(dailyNeedKWh.raw()));
    m.emplace("minSurplusKWh", Value(minSurplusKWh.raw()));
    m.emplace("tariff", Value(tariff.raw()));
    return Value(std::move(m));
}

EnergyConfig EnergyConfig::from_value(const Value& v) {
    EnergyConfig c;
    c.dailyNeedKWh = Fixed4::from_raw(v.at("dailyNeedKWh").as_int());
    c.minSurplusKWh = Fixed4::from_raw(v.at("minSurplusKWh").as_int());
    c.tariff = Fixed4::from_raw(v.at("tariff").as_int());
    c.centralFraction = Fixed4::from_raw(v.at("centralFraction").as_int());
    return c;
}

Bytes MeterReading::signing_body() const {
    Value::Map m;
    m.emplace("at", Value(at));
    m.emplace("consumedKWh", Value(consumedKWh.raw()));
    m.emplace("deviceId", Value(deviceId));
    m.emplace("producedKWh", Value(producedKWh.raw()));
    m.emplace("tempC", Value(tempC.raw()));
    return encode(Value(std::move(m)));
}

Value MeterReading::to_value() const {
    Value::Map m;
    m.emplace("at", Value(at));
    m.emplace("consumedKWh", Value(consumedKWh.raw()));
    m.emplace("deviceId", Value(deviceId));
    m.emplace("producedKWh", Value(producedKWh.raw()));
    m.emplace("tempC", Value(tempC.raw()));
    return Value(std::move(m));
}

MeterReading MeterReading::from_value(const Value& v) {
    MeterReading r;
    r.deviceId = v.at("deviceId").as_string();
    r.at = v.at("at").as_int();
    r.consumedKWh = Fixed4::from_raw(v.at("consumedKWh").as_int());
    r.producedKWh = Fixed4::from_raw(v.at("producedKWh").as_int());
    r.tempC = Fixed4::from_raw(v.at("tempC").as_int());
    return r;
}

namespace {
// Zero-padded decimal timestamps keep lexicographic key order equal to
// numeric time order, so day windows are plain prefix-range scans.
std::string pad_time(int64_t at) {
    char buf[21];
    std::snprintf(buf, sizeof(buf), "%016lld", static_cast<long long>(at));
    return buf;
}
}  // namespace

std::string key_meter_reading(const IdentityId& prosumer, int64_t at) {
    return "energy/" + prosumer.hex() + "/r/" + pad_time(at);
}

std::string key_meter_prefix(const IdentityId& prosumer) {
    return "energy/" + prosumer.hex() + "/r/";
}

std::string key_device_last(const std::string& deviceId) {
    return "dev/" + deviceId + "/last";
}

std::string key_dispatch(const IdentityId& prosumer, int64_t at) {
    return "energy/dispatch/" + prosumer.hex() + "/" + pad_time(at);
}

std::string key_account(const IdentityId& owner) {
    return "account/" + owner.hex();
}

std::string key_district_aggregate(const std::string& districtId, int64_t at) {
    return "energy/district/" + districtId + "/" + pad_time(at);
}

// ---------------------------------------------------------------------------
// Push-sum
// ---------------------------------------------------------------------------

PushSumTrace push_sum(const std::vector<double>& values, uint64_t seed, int rounds) {
    const size_t n = values.size();
    PushSumTrace trace;
    if (n == 0) return trace;

    double truth = 0;
    for (double v : values) truth += v;

    std::vector<double> x = values;
    std::vector<double> w(n, 1.0);
    if (n == 1) {
        trace.estimates = {x[0] / w[0]};
        return trace;
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> shiftDist(1, n - 1);

    std::vector<double> nx(n), nw(n);
    for (int r = 0; r < rounds; ++r) {
        size_t shift = shiftDist(rng);  // same rotation for the whole round
        std::fill(nx.begin(), nx.end(), 0.0);
        std::fill(nw.begin(), nw.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            size_t target = (i + shift) % n;
            nx[i] += x[i] / 2;
            nw[i] += w[i] / 2;
            nx[target] += x[i] / 2;
            nw[target] += w[i] / 2;
        }
        x.swap(nx);
        w.swap(nw);

        double worst = 0;
        for (size_t i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(static_cast<double>(n) * x[i] / w[i] - truth));
        trace.worstErrorByRound.push_back(worst);
    }

    trace.estimates.resize(n);
    for (size_t i = 0; i < n; ++i) trace.estimates[i] = static_cast<double>(n) * x[i] / w[i];
    return trace;
}

std::optional<DistrictAggregate> swarm_aggregate(const std::string& districtId,
                                                 const std::vector<Fixed4>& surpluses,
                                                 Fixed4 centralFraction, uint64_t seed,
                                                 int rounds, int64_t at) {
    if (surpluses.empty()) return std::nullopt;
    std::vector<double> values;
    values.reserve(surpluses.size());
    for (Fixed4 s : surpluses) values.push_back(s.to_double());

    PushSumTrace trace = push_sum(values, seed, rounds);
    // The district reporter is agent 0; every agent's estimate is within the
    // convergence tolerance of this value anyway.
    DistrictAggregate agg;
    agg.districtId = districtId;
    agg.computedAt = at;
    agg.totalSurplusKWh = Fixed4::from_double_rounded(trace.estimates[0]);
    agg.toCentralKWh = agg.totalSurplusKWh.mul(centralFraction);
    agg.toTradeKWh = agg.totalSurplusKWh - agg.toCentralKWh;
    return agg;
}

// ---------------------------------------------------------------------------
// Forecasting
// ---------------------------------------------------------------------------

LoadForecast forecast_load(const std::vector<Fixed4>& hourlyHistory, size_t horizonHours,
                           int peakCount) {
    if (hourlyHistory.empty()) throw Error(Errc::forecast, "empty load history");
    const size_t L = hourlyHistory.size();
    LoadForecast out;
    out.seasonal = L >= 24 * 7;

    if (out.seasonal) {
        // Exact integer sums per hour-of-week; the division happens once, in
        // double, so independent recomputation reproduces the bits.
        std::array<int64_t, 168> sum{};
        std::array<int64_t, 168> count{};
        for (size_t i = 0; i < L; ++i) {
            sum[i % 168] += hourlyHistory[i].raw();
            count[i % 168] += 1;
        }
        out.values.reserve(horizonHours);
        for (size_t j = 0; j < horizonHours; ++j) {
            size_t how = (L + j) % 168;
            out.values.push_back(static_cast<double>(sum[how]) /
                                 (static_cast<double>(Fixed4::kScale) *
                                  static_cast<double>(count[how])));
        }
    } else {
        int64_t total = 0;
        for (Fixed4 v : hourlyHistory) total += v.raw();
        double mean = static_cast<double>(total) /
                      (static_cast<double>(Fixed4::kScale) * static_cast<double>(L));
        out.values.assign(horizonHours, mean);
    }

    // Peak hours-of-day, ranked by exact mean comparison (cross-multiplied
    // integer sums avoid floating-point ties), ties broken by earlier hour.
    std::array<int64_t, 24> sum{};
    std::array<int64_t, 24> count{};
    for (size_t i = 0; i < L; ++i) {
        sum[i % 24] += hourlyHistory[i].raw();
        count[i % 24] += 1;
    }
    std::vector<int> hours;
    for (int h = 0; h < 24; ++h)
        if (count[h] > 0) hours.push_back(h);
    std::stable_sort(hours.begin(), hours.end(), [&](int a, int b) {
        __int128 lhs = static_cast<__int128>(sum[a]) * count[b];
        __int128 rhs = static_cast<__int128>(sum[b]) * count[a];
        if (lhs != rhs) return lhs > rhs;
        return a < b;
    });
    if (peakCount < 0) peakCount = 0;
    if (hours.size() > static_cast<size_t>(peakCount)) hours.resize(peakCount);
    out.peakHours = std::move(hours);
    return out;
}

// ---------------------------------------------------------------------------
// Contract handlers
// ---------------------------------------------------------------------------

namespace {

EnergyConfig energy_config(TxContext& ctx) {
    auto v = ctx.get_decoded(kKeyEnergyConfig);
    if (!v) return EnergyConfig{};
    return EnergyConfig::from_value(*v);
}

Value energy_ingest(TxContext& ctx, const Value& args) {
    ctx.require_role(Role::prosumer, "energy.ingest");
    MeterReading reading = MeterReading::from_value(args);
    const Bytes& sig = args.at("deviceSig").as_bytes();
    if (sig.size() != 64) throw ContractError(Errc::validation, "bad device signature");
    if (reading.consumedKWh < Fixed4{} || reading.producedKWh < Fixed4{})
        throw ContractError(Errc::validation, "readings are non-negative");

    auto dev = ctx.get_decoded("dev/" + reading.deviceId);
    if (!dev) throw ContractError(Errc::permission, "device not registered");
    if (dev->at("kind").as_string() != "meter")
        throw ContractError(Errc::validation, "device is not a meter");
    Bytes ownerBytes = dev->at("owner").as_bytes();
    if (ownerBytes != Bytes(ctx.invoker().bytes.begin(), ctx.invoker().bytes.end()))
        throw ContractError(Errc::permission, "device belongs to another prosumer");

    PublicKey devKey{};
    const Bytes& pkb = dev->at("publicKey").as_bytes();
    std::copy(pkb.begin(), pkb.end(), devKey.begin());
    std::array<uint8_t, 64> sigArr{};
    std::copy(sig.begin(), sig.end(), sigArr.begin());
    if (!verify_signature(reading.signing_body(), sigArr, devKey))
        throw ContractError(Errc::permission, "device signature does not verify");

    // Timestamps are strictly monotone per device.
    std::string lastKey = key_device_last(reading.deviceId);
    if (auto last = ctx.get_decoded(lastKey)) {
        if (reading.at <= last->as_int())
            throw ContractError(Errc::ordering, "non-monotone device timestamp");
    }
    ctx.put_owned(lastKey, Value(reading.at), ctx.invoker(), {});

    // Readings default to owner-only visibility.
    ctx.put_owned(key_meter_reading(ctx.invoker(), reading.at), reading.to_value(),
                  ctx.invoker(), {});
    return Value(nullptr);
}

Value energy_dispatch(TxContext& ctx, const Value& args) {
    if (!ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "dispatch evaluation runs as the authority");
    auto prosumer = ctx.identity_by_label(args.at("prosumer").as_string());
    if (!prosumer) throw ContractError(Errc::not_found, "prosumer not registered");
    int64_t at = args.at("at").as_int();
    EnergyConfig cfg = energy_config(ctx);

    // Sum the day's production. Keys are zero-padded by time, so the scan
    // visits readings in time order.
    int64_t dayStart = (at / kMillisPerDay) * kMillisPerDay;
    Fixed4 produced;
    ctx.scan_raw(key_meter_prefix(prosumer->id),
                 [&](const std::string&, const StateEntry& e) {
                     MeterReading r = MeterReading::from_value(decode(e.value));
                     if (r.at >= dayStart && r.at < dayStart + kMillisPerDay)
                         produced = produced + r.producedKWh;
                     return true;
                 });

    if (!(produced > cfg.trigger()))
        return Value(Value::Map{{"dispatched", Value(false)},
                                {"producedKWh", Value(produced.raw())}});

    Fixed4 surplus = produced - cfg.dailyNeedKWh;
    Fixed4 payment = surplus.mul(cfg.tariff);
    std::string destination = "centralGrid";
    if (const Value* d = args.find("destination")) destination = d->as_string();

    Value::Map order;
    order.emplace("at", Value(at));
    order.emplace("destination", Value(destination));
    order.emplace("payment", Value(payment.raw()));
    order.emplace("prosumer", Value(Bytes(prosumer->id.bytes.begin(), prosumer->id.bytes.end())));
    order.emplace("surplusKWh", Value(surplus.raw()));
    order.emplace("tariff", Value(cfg.tariff.raw()));
    ctx.put_owned(key_dispatch(prosumer->id, at), Value(order), ctx.authority(),
                  Acl{{prosumer->id, kPermRead}});

    // Payment credited atomically in the same transaction.
    Fixed4 balance;
    std::string accountKey = key_account(prosumer->id);
    if (auto acc = ctx.get_decoded(accountKey))
        balance = Fixed4::from_raw(acc->at("balance").as_int());
    balance = balance + payment;
    ctx.put_owned(accountKey, Value(Value::Map{{"balance", Value(balance.raw())}}),
                  prosumer->id, {});

    ctx.emit("energy/dispatch", Value(order));
    return Value(Value::Map{{"dispatched", Value(true)},
                            {"payment", Value(payment.raw())},
                            {"surplusKWh", Value(surplus.raw())}});
}

Value energy_aggregate(TxContext& ctx, const Value& args) {
    if (!ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "aggregates are recorded by the authority");
    const std::string& district = args.at("district").as_string();
    Fixed4 total = Fixed4::from_raw(args.at("total").as_int());
    Fixed4 toCentral = Fixed4::from_raw(args.at("toCentral").as_int());
    Fixed4 toTrade = Fixed4::from_raw(args.at("toTrade").as_int());
    if (!(toCentral + toTrade == total))
        throw ContractError(Errc::validation, "aggregate split does not reconstruct the total");
    int64_t at = args.at("at").as_int();

    Value::Map rec;
    rec.emplace("computedAt", Value(at));
    rec.emplace("districtId", Value(district));
    rec.emplace("toCentralKWh", Value(toCentral.raw()));
    rec.emplace("toTradeKWh", Value(toTrade.raw()));
    rec.emplace("totalSurplusKWh", Value(total.raw()));
    ctx.put_owned(key_district_aggregate(district, at), Value(std::move(rec)), ctx.authority(),
                  Acl{{kAnyone, kPermRead}});
    return Value(nullptr);
}

}  // namespace

void register_energy_contracts(ContractRegistry& reg) {
    Contract energy{"energy", Category::dynamic, {}};
    energy.operations["ingest"] = energy_ingest;
    energy.operations["dispatch"] = energy_dispatch;
    energy.operations["aggregate"] = energy_aggregate;
    reg.add(std::move(energy));
}

}  // namespace egov
