#pragma once

#include "egov/engine.hpp"

// Shared consent state-machine operations, used by the generic consent
// contract and the health-scenario wrappers.
namespace egov::consent_ops {

// Opens a request; enforces the one-open-request rule per
// (requester, subject, resourceKey). Returns {consentId}.
Value request(TxContext& ctx, const Identity& subject, const std::string& resourceKey,
              std::string purpose);

// requested->approved/denied, approved->revoked; the invoker must be the
// data subject.
Value transition(TxContext& ctx, const Hash& consentId, ConsentStatus to);

}  // namespace egov::consent_ops
