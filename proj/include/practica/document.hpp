#pragma once
// JSON documents with source positions, for authoring files whose diagnostics
// must point at a line and column. Also the canonical writer for those files.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "practica/core_model.hpp"

namespace practica {

struct SourceSpan {
    std::string file;
    int line = 1;    // 1-based
    int column = 1;  // 1-based, in code points
    std::size_t length = 0;  // bytes
    std::size_t offset = 0;  // byte offset of the first character

    bool operator==(const SourceSpan&) const = default;
};

struct Diagnostic {
    Severity severity = Severity::error;
    std::string code;
    std::string message;
    SourceSpan span;
};

// "file:line:column: error[CODE]: message"
std::string format_diagnostic(const Diagnostic& d);

namespace doc {

class Value {
public:
    enum class Type { null, boolean, number, string, array, object };
    struct Member;

    Value() = default;
    static Value null() { return Value(); }
    static Value boolean(bool b);
    static Value number(double d);
    static Value string(std::string s);
    static Value array();
    static Value object();

    Type type() const { return type_; }
    bool is_null() const { return type_ == Type::null; }
    bool is_bool() const { return type_ == Type::boolean; }
    bool is_number() const { return type_ == Type::number; }
    bool is_string() const { return type_ == Type::string; }
    bool is_array() const { return type_ == Type::array; }
    bool is_object() const { return type_ == Type::object; }

    bool as_bool() const { return bool_; }
    double as_number() const { return number_; }
    const std::string& as_string() const { return string_; }
    const std::vector<Value>& items() const { return items_; }
    const std::vector<Member>& members() const { return members_; }

    // First member with this key, or nullptr.
    const Value* get(std::string_view key) const;
    const Member* member(std::string_view key) const;

    Value& push(Value v);
    Value& set(std::string key, Value v);
    Value& add_member(std::string key, SourceSpan key_span, Value v);  // no duplicate check

    const SourceSpan& span() const { return span_; }
    void set_span(SourceSpan s) { span_ = std::move(s); }

private:
    Type type_ = Type::null;
    bool bool_ = false;
    double number_ = 0.0;
    std::string string_;
    std::vector<Value> items_;
    std::vector<Member> members_;
    SourceSpan span_;
};

struct Value::Member {
    std::string key;
    SourceSpan key_span;
    Value value;
};

struct ParseResult {
    std::optional<Value> value;
    std::vector<Diagnostic> diagnostics;
};

// Syntax errors end parsing with a single SYNTAX diagnostic. Duplicate keys are
// reported (DUPLICATE_KEY) and the first occurrence wins.
ParseResult parse(std::string_view text, std::string file = {});

// Two-space indentation, object keys sorted, scalar-only arrays inline,
// numbers in their shortest exact form. Ends with a newline.
std::string write_canonical(const Value& v);

std::string_view type_name(Value::Type t);

}  // namespace doc

}  // namespace practica
