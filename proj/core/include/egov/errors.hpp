#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace egov {

enum class Errc {
    encoding,
    ordering,
    corrupt_ledger,
    dag_structure,
    duplicate_identity,
    duplicate_request,
    permission,
    not_found,
    consent_state,
    dispatch,
    state_divergence,
    mvcc_conflict,
    replay_divergence,
    divergence_fault,
    feed,
    config,
    validation,
    protocol,
    forecast,
    script,
    internal,
};

std::string_view errc_name(Errc c);
Errc errc_from_name(std::string_view name);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

// Thrown by contract handlers. Unlike Error, a ContractError does not abort the
// run: the transaction is recorded on the ledger as failed, carrying the code.
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace egov
