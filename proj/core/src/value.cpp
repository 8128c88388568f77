#include "egov/value.hpp"

#include <limits>

namespace egov {

std::string_view errc_name(Errc c) {
    switch (c) {
        case Errc::encoding: return "EncodingError";
        case Errc::ordering: return "OrderingError";
        case Errc::corrupt_ledger: return "CorruptLedgerError";
        case Errc::dag_structure: return "DagStructureError";
        case Errc::duplicate_identity: return "DuplicateIdentityError";
        case Errc::duplicate_request: return "DuplicateRequestError";
        case Errc::permission: return "PermissionError";
        case Errc::not_found: return "NotFoundError";
        case Errc::consent_state: return "ConsentStateError";
        case Errc::dispatch: return "DispatchError";
        case Errc::state_divergence: return "StateDivergenceError";
        case Errc::mvcc_conflict: return "MvccConflictError";
        case Errc::replay_divergence: return "ReplayDivergenceError";
        case Errc::divergence_fault: return "DivergenceFault";
        case Errc::feed: return "FeedError";
        case Errc::config: return "ConfigError";
        case Errc::validation: return "ValidationError";
        case Errc::protocol: return "ProtocolError";
        case Errc::forecast: return "ForecastError";
        case Errc::script: return "ScriptError";
        case Errc::internal: return "InternalError";
    }
    return "UnknownError";
}

Errc errc_from_name(std::string_view name) {
    for (int i = 0; i <= static_cast<int>(Errc::internal); ++i) {
        auto c = static_cast<Errc>(i);
        if (errc_name(c) == name) return c;
    }
    return Errc::internal;
}

Value::Value(uint64_t i) : v_(int64_t{}) {
    if (i > static_cast<uint64_t>(std::numeric_limits<int64_t>::max()))
        throw Error(Errc::encoding, "unsigned value exceeds int64 range");
    v_ = static_cast<int64_t>(i);
}

const Value& Value::at(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw Error(Errc::encoding, "missing map key '" + key + "'");
    return *v;
}

const Value* Value::find(const std::string& key) const {
    const Map& m = as_map();
    auto it = m.find(key);
    return it == m.end() ? nullptr : &it->second;
}

namespace {

// Wire tags. One byte each; integers are 8-byte big-endian two's complement;
// lengths/counts are 4-byte big-endian.
constexpr uint8_t kTagNull = 0x00;
constexpr uint8_t kTagFalse = 0x01;
constexpr uint8_t kTagTrue = 0x02;
constexpr uint8_t kTagInt = 0x03;
constexpr uint8_t kTagString = 0x04;
constexpr uint8_t kTagBytes = 0x05;
constexpr uint8_t kTagList = 0x06;
constexpr uint8_t kTagMap = 0x07;

void put_u32(Bytes& out, uint64_t v) {
    if (v > 0xFFFFFFFFull) throw Error(Errc::encoding, "length exceeds u32");
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_i64(Bytes& out, int64_t v) {
    auto u = static_cast<uint64_t>(v);
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(u >> shift));
}

struct Reader {
    ByteSpan data;
    size_t pos = 0;

    uint8_t u8() {
        if (pos >= data.size()) throw Error(Errc::encoding, "truncated value");
        return data[pos++];
    }
    uint32_t u32() {
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }
    int64_t i64() {
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | u8();
        return static_cast<int64_t>(v);
    }
    ByteSpan take(size_t n) {
        if (data.size() - pos < n) throw Error(Errc::encoding, "truncated value");
        ByteSpan s = data.subspan(pos, n);
        pos += n;
        return s;
    }
};

Value decode_one(Reader& r, int depth) {
    if (depth > 64) throw Error(Errc::encoding, "value nesting too deep");
    switch (r.u8()) {
        case kTagNull: return Value(nullptr);
        case kTagFalse: return Value(false);
        case kTagTrue: return Value(true);
        case kTagInt: return Value(r.i64());
        case kTagString: {
            size_t n = r.u32();
            ByteSpan s = r.take(n);
            return Value(std::string(s.begin(), s.end()));
        }
        case kTagBytes: {
            size_t n = r.u32();
            ByteSpan s = r.take(n);
            return Value(Bytes(s.begin(), s.end()));
        }
        case kTagList: {
            size_t n = r.u32();
            Value::List items;
            items.reserve(std::min<size_t>(n, 4096));
            for (size_t i = 0; i < n; ++i) items.push_back(decode_one(r, depth + 1));
            return Value(std::move(items));
        }
        case kTagMap: {
            size_t n = r.u32();
            Value::Map m;
            std::string prev;
            for (size_t i = 0; i < n; ++i) {
                size_t klen = r.u32();
                ByteSpan kb = r.take(klen);
                std::string key(kb.begin(), kb.end());
                if (i > 0 && key <= prev)
                    throw Error(Errc::encoding, "map keys not strictly ascending");
                Value v = decode_one(r, depth + 1);
                m.emplace(key, std::move(v));
                prev = std::move(key);
            }
            return Value(std::move(m));
        }
        default:
            throw Error(Errc::encoding, "unsupported value tag");
    }
}

}  // namespace

void encode_into(const Value& v, Bytes& out) {
    switch (v.kind()) {
        case Value::Kind::null:
            out.push_back(kTagNull);
            break;
        case Value::Kind::boolean:
            out.push_back(v.as_bool() ? kTagTrue : kTagFalse);
            break;
        case Value::Kind::integer:
            out.push_back(kTagInt);
            put_i64(out, v.as_int());
            break;
        case Value::Kind::string: {
            const std::string& s = v.as_string();
            out.push_back(kTagString);
            put_u32(out, s.size());
            out.insert(out.end(), s.begin(), s.end());
            break;
        }
        case Value::Kind::bytes: {
            const Bytes& b = v.as_bytes();
            out.push_back(kTagBytes);
            put_u32(out, b.size());
            out.insert(out.end(), b.begin(), b.end());
            break;
        }
        case Value::Kind::list: {
            const auto& items = v.as_list();
            out.push_back(kTagList);
            put_u32(out, items.size());
            for (const Value& item : items) encode_into(item, out);
            break;
        }
        case Value::Kind::map: {
            const auto& m = v.as_map();
            out.push_back(kTagMap);
            put_u32(out, m.size());
            for (const auto& [key, item] : m) {  // std::map iterates ascending
                put_u32(out, key.size());
                out.insert(out.end(), key.begin(), key.end());
                encode_into(item, out);
            }
            break;
        }
    }
}

Bytes encode(const Value& v) {
    Bytes out;
    encode_into(v, out);
    return out;
}

Value decode(ByteSpan data) {
    Reader r{data};
    Value v = decode_one(r, 0);
    if (r.pos != data.size()) throw Error(Errc::encoding, "trailing bytes after value");
    return v;
}

}  // namespace egov
