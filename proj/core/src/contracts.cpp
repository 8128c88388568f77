#include "egov/contracts.hpp"

#include "egov/energy.hpp"
#include "egov/health.hpp"
#include "egov/oracle.hpp"

namespace egov {

std::string_view thermo_action_name(ThermoAction a) {
    switch (a) {
        case ThermoAction::turnOnAC: return "turnOnAC";
        case ThermoAction::turnOnHeating: return "turnOnHeating";
        case ThermoAction::sendPrompt: return "sendPrompt";
        case ThermoAction::doNothing: return "doNothing";
    }
    return "?";
}

void ThermostatConfig::validate() const {
    if (!(lowTempC < highTempC))
        throw Error(Errc::config, "lowTempC must be below highTempC");
    if (consumptionThresholdW <= Fixed4{})
        throw Error(Errc::config, "consumption threshold must be positive");
}

Value ThermostatConfig::to_value() const {
    Value::Map m;
    m.emplace("highTempC", Value(highTempC.raw()));
    m.emplace("lowTempC", Value(lowTempC.raw()));
    m.emplace("profile", Value(profile == ThermoProfile::paperLiteral ? "paperLiteral"
                                                                      : "conventional"));
    m.emplace("thresholdW", Value(consumptionThresholdW.raw()));
    return Value(std::move(m));
}

ThermostatConfig ThermostatConfig::from_value(const Value& v) {
    ThermostatConfig cfg;
    cfg.lowTempC = Fixed4::from_raw(v.at("lowTempC").as_int());
    cfg.highTempC = Fixed4::from_raw(v.at("highTempC").as_int());
    cfg.consumptionThresholdW = Fixed4::from_raw(v.at("thresholdW").as_int());
    const std::string& p = v.at("profile").as_string();
    if (p == "paperLiteral") cfg.profile = ThermoProfile::paperLiteral;
    else if (p == "conventional") cfg.profile = ThermoProfile::conventional;
    else throw Error(Errc::config, "unknown thermostat profile");
    cfg.validate();
    return cfg;
}

static const char* kPromptLow =
    "The daily electricity consumption threshold has been reached. "
    "Would you like to turn on the A/C?";
static const char* kPromptHigh =
    "The daily electricity consumption threshold has been reached. "
    "Would you like to turn on the heating_unit?";

ThermoDecision thermostat_step(const ThermostatConfig& cfg, Fixed4 tempC, Fixed4 consumptionW) {
    ThermoDecision d;
    if (tempC < cfg.lowTempC) {
        if (consumptionW < cfg.consumptionThresholdW) {
            d.action = cfg.low_action();
        } else {
            d.action = ThermoAction::sendPrompt;
            d.promptBranch = ThermoBranch::low;
            d.promptText = kPromptLow;
        }
    } else if (tempC > cfg.highTempC) {
        if (consumptionW < cfg.consumptionThresholdW) {
            d.action = cfg.high_action();
        } else {
            d.action = ThermoAction::sendPrompt;
            d.promptBranch = ThermoBranch::high;
            d.promptText = kPromptHigh;
        }
    }
    return d;
}

ThermoAction thermostat_answer(const ThermostatConfig& cfg, ThermoBranch branch, bool yes) {
    if (!yes) return ThermoAction::doNothing;
    return branch == ThermoBranch::low ? cfg.low_action() : cfg.high_action();
}

std::string key_thermostat_pending(const IdentityId& prosumer) {
    return "energy/thermostat/" + prosumer.hex() + "/pending";
}

std::string key_diploma(const IdentityId& holder, const Hash& docHash) {
    return "diploma/" + holder.hex() + "/" + docHash.hex();
}

std::string key_land_title(const std::string& vatNumber, const std::string& parcelId) {
    return "land/" + vatNumber + "/" + parcelId;
}

std::string key_land_prefix(const std::string& vatNumber) {
    return "land/" + vatNumber + "/";
}

namespace {

Hash hash_arg(const Value& v) {
    const Bytes& b = v.as_bytes();
    if (b.size() != 32) throw ContractError(Errc::validation, "expected a 32-byte hash");
    Hash h;
    std::copy(b.begin(), b.end(), h.bytes.begin());
    return h;
}

ThermostatConfig thermostat_config(TxContext& ctx) {
    auto v = ctx.get_decoded(kKeyThermostatConfig);
    if (!v) return ThermostatConfig{};
    return ThermostatConfig::from_value(*v);
}

// --- diploma -----------------------------------------------------------------

Value diploma_issue(TxContext& ctx, const Value& args) {
    if (!ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "diplomas are written by the authority");
    auto holder = ctx.identity_by_label(args.at("holder").as_string());
    if (!holder) throw ContractError(Errc::not_found, "diploma holder not registered");
    Hash docHash = hash_arg(args.at("docHash"));
    Value::Map rec;
    rec.emplace("institution", args.at("institution"));
    rec.emplace("issuedAt", args.at("issuedAt"));  // ISO date string
    // Diplomas are publicly verifiable: world-readable acl.
    ctx.put_owned(key_diploma(holder->id, docHash), Value(std::move(rec)), ctx.authority(),
                  Acl{{kAnyone, kPermRead}});
    return Value(nullptr);
}

// Static category: one lookup, same control path for every input, no writes.
// Unknown holders resolve to the zero identity so the lookup happens anyway.
Value diploma_verify(TxContext& ctx, const Value& args) {
    auto holder = ctx.identity_by_label(args.at("holder").as_string());
    Hash docHash = hash_arg(args.at("docHash"));
    IdentityId hid = holder ? holder->id : IdentityId{};
    const StateEntry* e = ctx.get_raw(key_diploma(hid, docHash));
    bool valid = holder.has_value() && e != nullptr;
    Value::Map out;
    out.emplace("valid", Value(valid));
    if (valid) {
        Value rec = decode(e->value);
        out.emplace("institution", rec.at("institution"));
        out.emplace("issuedAt", rec.at("issuedAt"));
    }
    return Value(std::move(out));
}

// --- thermostat --------------------------------------------------------------

Value thermostat_step_op(TxContext& ctx, const Value& args) {
    ctx.require_role(Role::prosumer, "thermostat.step");
    ThermostatConfig cfg = thermostat_config(ctx);
    Fixed4 temp = Fixed4::from_raw(args.at("tempC").as_int());
    Fixed4 cons = Fixed4::from_raw(args.at("consumptionW").as_int());

    std::string pendingKey = key_thermostat_pending(ctx.invoker());
    ThermoDecision d = thermostat_step(cfg, temp, cons);
    if (d.action == ThermoAction::sendPrompt) {
        Value::Map pending;
        pending.emplace("at", Value(ctx.logical_time()));
        pending.emplace("branch", Value(d.promptBranch == ThermoBranch::low ? "low" : "high"));
        ctx.put_owned(pendingKey, Value(std::move(pending)), ctx.invoker(), {});
        ctx.emit("thermostat/prompt", Value(Value::Map{
                                          {"prosumer", Value(ctx.invoker().hex())},
                                          {"text", Value(d.promptText)}}));
    } else if (d.action != ThermoAction::doNothing) {
        ctx.emit("device/command",
                 Value(Value::Map{{"action", Value(std::string(thermo_action_name(d.action)))},
                                  {"prosumer", Value(ctx.invoker().hex())}}));
    }
    return Value(Value::Map{{"action", Value(std::string(thermo_action_name(d.action)))}});
}

Value thermostat_answer_op(TxContext& ctx, const Value& args) {
    ctx.require_role(Role::prosumer, "thermostat.answer");
    const std::string& answer = args.at("answer").as_string();
    if (answer != "YES" && answer != "NO")
        throw ContractError(Errc::validation, "answer must be YES or NO");

    std::string pendingKey = key_thermostat_pending(ctx.invoker());
    const StateEntry* pending = ctx.get_raw(pendingKey);
    if (!pending || pending->value.empty())
        throw ContractError(Errc::protocol, "no prompt pending");
    Value p = decode(pending->value);
    if (p.is_null()) throw ContractError(Errc::protocol, "no prompt pending");
    ThermoBranch branch =
        p.at("branch").as_string() == "low" ? ThermoBranch::low : ThermoBranch::high;

    ThermostatConfig cfg = thermostat_config(ctx);
    ThermoAction action = thermostat_answer(cfg, branch, answer == "YES");
    ctx.put_owned(pendingKey, Value(nullptr), ctx.invoker(), {});  // clear
    if (action != ThermoAction::doNothing)
        ctx.emit("device/command",
                 Value(Value::Map{{"action", Value(std::string(thermo_action_name(action)))},
                                  {"prosumer", Value(ctx.invoker().hex())}}));
    return Value(Value::Map{{"action", Value(std::string(thermo_action_name(action)))}});
}

// --- land titles --------------------------------------------------------------

Value land_register(TxContext& ctx, const Value& args) {
    if (!ctx.invoker_is_authority())
        throw ContractError(Errc::permission, "land titles are written by the registry authority");
    const std::string& vat = args.at("vatNumber").as_string();
    const std::string& parcel = args.at("parcelId").as_string();
    if (vat.empty() || parcel.empty() || vat.find('/') != std::string::npos ||
        parcel.find('/') != std::string::npos)
        throw ContractError(Errc::validation, "vat and parcel are non-empty and slash-free");
    auto owner = ctx.identity_by_label(args.at("owner").as_string());
    if (!owner) throw ContractError(Errc::not_found, "title owner not registered");

    // One VAT number indexes the titles of one citizen.
    bool conflicting = false;
    ctx.scan_raw(key_land_prefix(vat), [&](const std::string&, const StateEntry& e) {
        if (e.owner != owner->id) conflicting = true;
        return !conflicting;
    });
    if (conflicting)
        throw ContractError(Errc::validation, "vat number already bound to another citizen");

    Value::Map rec;
    rec.emplace("owner", Value(Bytes(owner->id.bytes.begin(), owner->id.bytes.end())));
    rec.emplace("parcelId", Value(parcel));
    rec.emplace("vatNumber", Value(vat));
    ctx.put_owned(key_land_title(vat, parcel), Value(std::move(rec)), owner->id, {});
    return Value(nullptr);
}

Value land_query(TxContext& ctx, const Value& args) {
    ctx.require_role(Role::taxService, "land.query");
    const std::string& vat = args.at("vatNumber").as_string();

    Value::List titles;
    std::optional<IdentityId> owner;
    ctx.scan_raw(key_land_prefix(vat), [&](const std::string&, const StateEntry& e) {
        titles.push_back(decode(e.value));
        owner = e.owner;
        return true;
    });
    if (titles.empty()) return Value(Value::List{});  // unknown VAT

    // Access requires the owning citizen's approved consent covering the VAT
    // prefix (the requester is no owner, so read_checked resolves via consent).
    const StateEntry* probe = ctx.get_raw(key_land_title(vat, titles.front()
                                                                  .at("parcelId")
                                                                  .as_string()));
    if (!probe || !ctx.may_read(key_land_title(vat, titles.front().at("parcelId").as_string()),
                                *probe, ctx.invoker()))
        throw ContractError(Errc::permission, "no approved consent for vat " + vat);
    return Value(std::move(titles));
}

}  // namespace

void register_gov_contracts(ContractRegistry& reg) {
    Contract diploma{"diploma", Category::static_, {}};
    diploma.operations["issue"] = diploma_issue;
    diploma.operations["verify"] = diploma_verify;
    reg.add(std::move(diploma));

    Contract thermostat{"thermostat", Category::dynamic, {}};
    thermostat.operations["step"] = thermostat_step_op;
    thermostat.operations["answer"] = thermostat_answer_op;
    reg.add(std::move(thermostat));

    Contract land{"land", Category::dynamic, {}};
    land.operations["register"] = land_register;
    land.operations["query"] = land_query;
    reg.add(std::move(land));
}

ContractRegistry builtin_registry() {
    ContractRegistry reg;
    register_policy_contracts(reg);
    register_gov_contracts(reg);
    register_oracle_contracts(reg);
    register_energy_contracts(reg);
    register_health_contracts(reg);
    return reg;
}

}  // namespace egov
