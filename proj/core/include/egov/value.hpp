#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "egov/bytes.hpp"
#include "egov/errors.hpp"

namespace egov {

// Structured value with a canonical binary encoding. Hashes and signatures are
// computed over these encodings, so two rules are absolute: map keys are
// serialized in ascending byte order, and every scalar has exactly one
// representation. decode() is strict — it rejects unsorted or duplicate map
// keys, bad tags and trailing bytes — which makes encode/decode a bijection
// on the supported value space.
class Value {
public:
    enum class Kind { null, boolean, integer, string, bytes, list, map };

    using List = std::vector<Value>;
    // std::string comparison is memcmp-like, i.e. ascending unsigned byte order.
    using Map = std::map<std::string, Value>;

    Value() : v_(nullptr) {}
    Value(std::nullptr_t) : v_(nullptr) {}
    Value(bool b) : v_(b) {}
    Value(int64_t i) : v_(i) {}
    Value(int i) : v_(static_cast<int64_t>(i)) {}
    Value(uint64_t i);
    Value(std::string s) : v_(std::move(s)) {}
    Value(const char* s) : v_(std::string(s)) {}
    Value(Bytes b) : v_(std::move(b)) {}
    Value(List l) : v_(std::move(l)) {}
    Value(Map m) : v_(std::move(m)) {}

    Kind kind() const { return static_cast<Kind>(v_.index()); }

    bool is_null() const { return kind() == Kind::null; }

    bool as_bool() const { return get<bool>("boolean"); }
    int64_t as_int() const { return get<int64_t>("integer"); }
    const std::string& as_string() const { return get<std::string>("string"); }
    const Bytes& as_bytes() const { return get<Bytes>("bytes"); }
    const List& as_list() const { return get<List>("list"); }
    const Map& as_map() const { return get<Map>("map"); }
    Map& as_map() { return std::get<Map>(v_); }

    // Map convenience: missing key -> EncodingError.
    const Value& at(const std::string& key) const;
    const Value* find(const std::string& key) const;

    bool operator==(const Value& other) const = default;

private:
    template <typename T>
    const T& get(const char* what) const {
        if (!std::holds_alternative<T>(v_))
            throw Error(Errc::encoding, std::string("value is not a ") + what);
        return std::get<T>(v_);
    }

    std::variant<std::nullptr_t, bool, int64_t, std::string, Bytes, List, Map> v_;
};

Bytes encode(const Value& v);
void encode_into(const Value& v, Bytes& out);

// Strict decode of exactly one value spanning the whole input.
Value decode(ByteSpan data);

}  // namespace egov
