#pragma once

#include <optional>
#include <string>

#include "egov/engine.hpp"
#include "egov/fixed.hpp"

namespace egov {

// ---------------------------------------------------------------------------
// Thermostat (dynamic contract)
// ---------------------------------------------------------------------------

enum class ThermoAction { turnOnAC, turnOnHeating, sendPrompt, doNothing };
enum class ThermoBranch { low, high };

std::string_view thermo_action_name(ThermoAction a);

// The published decision logic maps the cold branch to the air conditioner and
// the hot branch to the heating unit. That is the reverse of physical
// convention, so the mapping is a profile: paperLiteral reproduces the
// original table exactly, conventional swaps the two device actions.
enum class ThermoProfile { paperLiteral, conventional };

struct ThermostatConfig {
    Fixed4 lowTempC = Fixed4::from_int(18);
    Fixed4 highTempC = Fixed4::from_int(25);
    Fixed4 consumptionThresholdW = Fixed4::from_int(25);
    ThermoProfile profile = ThermoProfile::paperLiteral;

    ThermoAction low_action() const {
        return profile == ThermoProfile::paperLiteral ? ThermoAction::turnOnAC
                                                      : ThermoAction::turnOnHeating;
    }
    ThermoAction high_action() const {
        return profile == ThermoProfile::paperLiteral ? ThermoAction::turnOnHeating
                                                      : ThermoAction::turnOnAC;
    }
    void validate() const;  // lowTempC < highTempC, threshold > 0

    Value to_value() const;
    static ThermostatConfig from_value(const Value& v);
};

struct ThermoDecision {
    ThermoAction action = ThermoAction::doNothing;
    std::optional<ThermoBranch> promptBranch;  // set when action == sendPrompt
    std::string promptText;
};

// One evaluation step. Comparisons are strict exactly as written: boundary
// temperatures fall in the do-nothing band, consumption equal to the
// threshold takes the prompt branch.
ThermoDecision thermostat_step(const ThermostatConfig& cfg, Fixed4 tempC, Fixed4 consumptionW);

// Resolution of a pending prompt: YES triggers the branch action, NO does
// nothing.
ThermoAction thermostat_answer(const ThermostatConfig& cfg, ThermoBranch branch, bool yes);

inline constexpr const char* kKeyThermostatConfig = "config/thermostat";
std::string key_thermostat_pending(const IdentityId& prosumer);

// ---------------------------------------------------------------------------
// Diploma verification (static contract) and land titles (dynamic contract)
// ---------------------------------------------------------------------------

std::string key_diploma(const IdentityId& holder, const Hash& docHash);
std::string key_land_title(const std::string& vatNumber, const std::string& parcelId);
std::string key_land_prefix(const std::string& vatNumber);

// Registers diploma, thermostat and land contracts.
void register_gov_contracts(ContractRegistry& reg);

}  // namespace egov
