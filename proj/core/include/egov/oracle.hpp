#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egov/engine.hpp"

namespace egov {

// External facts enter the ledger exclusively through records written by
// oracle-role identities under "oracle/<source>/<n>". Contracts that need
// real-world data read those keys, never the world directly, which keeps
// execution deterministic.

struct OracleRecord {
    std::string source;
    Bytes payload;          // canonical encoding of the feed event payload
    int64_t observedAt = 0; // the feed event's logical time
    IdentityId oracleId;

    Value to_value() const;
    static OracleRecord from_value(const Value& v);
};

std::string key_oracle_record(const std::string& source, uint64_t index);
std::string key_oracle_count(const std::string& source);
std::string key_law_notice(const std::string& lawId, uint64_t index);
std::string key_law_notice_count(const std::string& lawId);

// A scripted feed: the deterministic stand-in for a real external source.
struct FeedEventScript {
    int64_t at = 0;
    Value payload;
};

struct FeedScript {
    std::string name;
    bool law = false;                     // law feeds trigger notifications
    std::vector<std::string> recipients;  // labels; notaries etc. for law feeds
    std::vector<FeedEventScript> events;  // ascending `at`
};

// Scenario-driven polling. Returns the next feed event due at or before `at`
// that has not yet been written on-ledger (judged by the committed record
// count in `state`), or nullopt. The caller turns it into a signed oracle
// transaction.
struct DueFeedEvent {
    std::string source;
    uint64_t index = 0;
    FeedEventScript event;
};
std::optional<DueFeedEvent> poll_feed(const WorldState& state, const FeedScript& feed,
                                      int64_t at);

// Registers the oracle and law contracts:
//   oracle.publish {source, payload, observedAt}      (role oracle)
//   law.notify     {source, index, recipients[]}      (role oracle)
//   law.confirm    {lawId}                            (listed recipients)
void register_oracle_contracts(ContractRegistry& reg);

}  // namespace egov
