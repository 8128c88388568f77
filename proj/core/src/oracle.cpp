#include "egov/oracle.hpp"

namespace egov {

Value OracleRecord::to_value() const {
    Value::Map m;
    m.emplace("observedAt", Value(observedAt));
    m.emplace("oracleId", Value(Bytes(oracleId.bytes.begin(), oracleId.bytes.end())));
    m.emplace("payload", Value(payload));
    m.emplace("source", Value(source));
    return Value(std::move(m));
}

OracleRecord OracleRecord::from_value(const Value& v) {
    OracleRecord r;
    r.source = v.at("source").as_string();
    r.payload = v.at("payload").as_bytes();
    r.observedAt = v.at("observedAt").as_int();
    const Bytes& ob = v.at("oracleId").as_bytes();
    if (ob.size() != 32) throw Error(Errc::encoding, "bad oracle id");
    std::copy(ob.begin(), ob.end(), r.oracleId.bytes.begin());
    return r;
}

std::string key_oracle_record(const std::string& source, uint64_t index) {
    return "oracle/" + source + "/" + std::to_string(index);
}

std::string key_oracle_count(const std::string& source) {
    return "oracle/" + source + "/count";
}

std::string key_law_notice(const std::string& lawId, uint64_t index) {
    return "law/notice/" + lawId + "/" + std::to_string(index);
}

std::string key_law_notice_count(const std::string& lawId) {
    return "law/notice/" + lawId + "/count";
}

std::optional<DueFeedEvent> poll_feed(const WorldState& state, const FeedScript& feed,
                                      int64_t at) {
    uint64_t written = 0;
    if (const StateEntry* count = state.find(key_oracle_count(feed.name)))
        written = static_cast<uint64_t>(decode(count->value).as_int());
    if (written >= feed.events.size()) return std::nullopt;
    const FeedEventScript& next = feed.events[written];
    if (next.at > at) return std::nullopt;
    return DueFeedEvent{feed.name, written, next};
}

namespace {

// --- oracle.publish -----------------------------------------------------------

Value oracle_publish(TxContext& ctx, const Value& args) {
    ctx.require_role(Role::oracle, "oracle.publish");
    const std::string& source = args.at("source").as_string();
    if (source.empty()) throw ContractError(Errc::feed, "empty feed name");

    uint64_t count = 0;
    if (auto v = ctx.get_decoded(key_oracle_count(source)))
        count = static_cast<uint64_t>(v->as_int());

    OracleRecord rec;
    rec.source = source;
    rec.payload = args.at("payload").as_bytes();
    rec.observedAt = args.at("observedAt").as_int();
    rec.oracleId = ctx.invoker();
    if (rec.observedAt > ctx.logical_time())
        throw ContractError(Errc::validation, "oracle records cannot observe the future");

    // Records are immutable once written; only the counter moves.
    std::string recordKey = key_oracle_record(source, count);
    if (ctx.get_raw(recordKey))
        throw ContractError(Errc::feed, "oracle record index already written");
    ctx.put_owned(recordKey, rec.to_value(), ctx.invoker(), Acl{{kAnyone, kPermRead}});
    ctx.put_owned(key_oracle_count(source), Value(static_cast<int64_t>(count + 1)),
                  ctx.invoker(), Acl{{kAnyone, kPermRead}});
    ctx.emit("oracle/record", Value(Value::Map{{"index", Value(static_cast<int64_t>(count))},
                                               {"source", Value(source)}}));
    return Value(Value::Map{{"index", Value(static_cast<int64_t>(count))}});
}

// --- law.notify ----------------------------------------------------------------

Value law_notify(TxContext& ctx, const Value& args) {
    ctx.require_role(Role::oracle, "law.notify");
    const std::string& source = args.at("source").as_string();
    uint64_t index = static_cast<uint64_t>(args.at("index").as_int());

    auto recVal = ctx.get_decoded(key_oracle_record(source, index));
    if (!recVal) throw ContractError(Errc::not_found, "no such oracle record");
    OracleRecord rec = OracleRecord::from_value(*recVal);

    Value payload = decode(rec.payload);
    const std::string& lawId = payload.at("lawId").as_string();
    const std::string& text = payload.at("text").as_string();
    Hash versionHash = sha256(to_bytes(text));

    const Value::List& recipientLabels = args.at("recipients").as_list();
    if (recipientLabels.empty())
        throw ContractError(Errc::config, "a law notification needs recipients");

    Value::List recipients;
    Acl noticeAcl{{kAnyone, kPermRead}};
    for (const Value& lbl : recipientLabels) {
        auto ident = ctx.identity_by_label(lbl.as_string());
        if (!ident) throw ContractError(Errc::not_found, "recipient not registered");
        recipients.push_back(Value(Bytes(ident->id.bytes.begin(), ident->id.bytes.end())));
        noticeAcl[ident->id] = kPermRead | kPermWrite;  // recipients write confirmations
    }

    uint64_t count = 0;
    if (auto v = ctx.get_decoded(key_law_notice_count(lawId)))
        count = static_cast<uint64_t>(v->as_int());

    // sentAt is the oracle observation time: provable date and time of sending.
    Value::Map notice;
    notice.emplace("confirmations", Value(Value::Map{}));
    notice.emplace("lawId", Value(lawId));
    notice.emplace("recipients", Value(recipients));
    notice.emplace("sentAt", Value(rec.observedAt));
    notice.emplace("versionHash", Value(Bytes(versionHash.bytes.begin(), versionHash.bytes.end())));
    ctx.put_owned(key_law_notice(lawId, count), Value(std::move(notice)), ctx.invoker(),
                  std::move(noticeAcl));
    ctx.put_owned(key_law_notice_count(lawId), Value(static_cast<int64_t>(count + 1)),
                  ctx.invoker(), Acl{{kAnyone, kPermRead}});

    for (const Value& r : recipients)
        ctx.emit("law/notify", Value(Value::Map{{"lawId", Value(lawId)},
                                                {"notice", Value(static_cast<int64_t>(count))},
                                                {"recipient", r}}));
    return Value(Value::Map{{"notice", Value(static_cast<int64_t>(count))}});
}

// --- law.confirm ----------------------------------------------------------------

Value law_confirm(TxContext& ctx, const Value& args) {
    const std::string& lawId = args.at("lawId").as_string();
    auto countVal = ctx.get_decoded(key_law_notice_count(lawId));
    if (!countVal || countVal->as_int() == 0)
        throw ContractError(Errc::not_found, "no notification for law " + lawId);
    uint64_t latest = static_cast<uint64_t>(countVal->as_int()) - 1;

    std::string noticeKey = key_law_notice(lawId, latest);
    Value notice = *ctx.get_decoded(noticeKey);

    Bytes me(ctx.invoker().bytes.begin(), ctx.invoker().bytes.end());
    bool listed = false;
    for (const Value& r : notice.at("recipients").as_list())
        if (r.as_bytes() == me) listed = true;
    if (!listed)
        throw ContractError(Errc::permission, "only listed recipients confirm receipt");

    int64_t sentAt = notice.at("sentAt").as_int();
    if (ctx.logical_time() < sentAt)
        throw ContractError(Errc::validation, "confirmation precedes notification");

    Value::Map m = notice.as_map();
    Value::Map confirmations = m.at("confirmations").as_map();
    if (confirmations.contains(ctx.invoker().hex()))
        throw ContractError(Errc::validation, "receipt already confirmed");
    confirmations.emplace(ctx.invoker().hex(), Value(ctx.logical_time()));
    m["confirmations"] = Value(std::move(confirmations));
    ctx.put(noticeKey, Value(std::move(m)));  // acl write grant for recipients
    ctx.emit("law/confirmed", Value(Value::Map{{"lawId", Value(lawId)},
                                               {"recipient", Value(me)}}));
    return Value(nullptr);
}

}  // namespace

void register_oracle_contracts(ContractRegistry& reg) {
    Contract oracle{"oracle", Category::oracleDriven, {}};
    oracle.operations["publish"] = oracle_publish;
    reg.add(std::move(oracle));

    Contract law{"law", Category::oracleDriven, {}};
    law.operations["notify"] = law_notify;
    law.operations["confirm"] = law_confirm;
    reg.add(std::move(law));
}

}  // namespace egov
