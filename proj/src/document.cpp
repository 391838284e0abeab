#include "practica/document.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <cstring>

#include "practica/text.hpp"

namespace practica {

std::string format_diagnostic(const Diagnostic& d) {
    std::string where = d.span.file.empty() ? "<input>" : d.span.file;
    return where + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) + ": " +
           std::string(to_string(d.severity)) + "[" + d.code + "]: " + d.message;
}

namespace doc {

Value Value::boolean(bool b) {
    Value v;
    v.type_ = Type::boolean;
    v.bool_ = b;
    return v;
}

Value Value::number(double d) {
    Value v;
    v.type_ = Type::number;
    v.number_ = d;
    return v;
}

Value Value::string(std::string s) {
    Value v;
    v.type_ = Type::string;
    v.string_ = std::move(s);
    return v;
}

Value Value::array() {
    Value v;
    v.type_ = Type::array;
    return v;
}

Value Value::object() {
    Value v;
    v.type_ = Type::object;
    return v;
}

const Value* Value::get(std::string_view key) const {
    const Member* m = member(key);
    return m ? &m->value : nullptr;
}

const Value::Member* Value::member(std::string_view key) const {
    for (const auto& m : members_)
        if (m.key == key) return &m;
    return nullptr;
}

Value& Value::push(Value v) {
    items_.push_back(std::move(v));
    return items_.back();
}

Value& Value::set(std::string key, Value v) {
    for (auto& m : members_)
        if (m.key == key) {
            m.value = std::move(v);
            return m.value;
        }
    members_.push_back({std::move(key), {}, std::move(v)});
    return members_.back().value;
}

Value& Value::add_member(std::string key, SourceSpan key_span, Value v) {
    members_.push_back({std::move(key), std::move(key_span), std::move(v)});
    return members_.back().value;
}

std::string_view type_name(Value::Type t) {
    switch (t) {
        case Value::Type::null: return "null";
        case Value::Type::boolean: return "boolean";
        case Value::Type::number: return "number";
        case Value::Type::string: return "string";
        case Value::Type::array: return "array";
        case Value::Type::object: return "object";
    }
    return "null";
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct SyntaxError {
    std::string message;
    SourceSpan span;
};

class Parser {
public:
    Parser(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

    ParseResult run() {
        ParseResult result;
        try {
            skip_ws();
            if (at_end()) throw error("empty document", 0);
            Value v = value(0);
            skip_ws();
            if (!at_end()) throw error("unexpected content after the document", 1);
            result.value = std::move(v);
        } catch (const SyntaxError& e) {
            result.value.reset();
            diags_.clear();
            diags_.push_back({Severity::error, "SYNTAX", e.message, e.span});
        }
        result.diagnostics = std::move(diags_);
        return result;
    }

private:
    std::string_view text_;
    std::string file_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int column_ = 1;
    std::vector<Diagnostic> diags_;

    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }

    void advance() {
        const unsigned char c = static_cast<unsigned char>(text_[pos_++]);
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else if ((c & 0xC0) != 0x80) {
            // Continuation bytes do not start a new column.
            if (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) {
                ++column_;
                while (pos_ < text_.size() && (static_cast<unsigned char>(text_[pos_]) & 0xC0) == 0x80) ++pos_;
            } else {
                ++column_;
            }
        }
    }

    SourceSpan here(std::size_t length) const { return {file_, line_, column_, length, pos_}; }

    SyntaxError error(std::string message, std::size_t length) const {
        const std::size_t avail = text_.size() - std::min(pos_, text_.size());
        return {std::move(message), here(std::min(length, avail))};
    }

    void skip_ws() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
                advance();
            else
                break;
        }
    }

    void expect(char c, const char* what) {
        if (at_end() || peek() != c) throw error(std::string("expected ") + what, 1);
        advance();
    }

    Value value(int depth) {
        if (depth > 256) throw error("nesting too deep", 1);
        if (at_end()) throw error("unexpected end of document", 0);
        SourceSpan start = here(0);
        Value v;
        switch (peek()) {
            case '{': v = object(depth); break;
            case '[': v = array(depth); break;
            case '"': v = Value::string(string_literal()); break;
            case 't': literal("true"); v = Value::boolean(true); break;
            case 'f': literal("false"); v = Value::boolean(false); break;
            case 'n': literal("null"); break;
            default:
                if (peek() == '-' || (peek() >= '0' && peek() <= '9')) {
                    v = Value::number(number());
                    break;
                }
                throw error(std::string("unexpected character '") + peek() + "'", 1);
        }
        start.length = pos_ - start.offset;
        v.set_span(start);
        return v;
    }

    void literal(const char* word) {
        const std::size_t n = std::strlen(word);
        if (text_.substr(pos_, n) != word) throw error("invalid literal", 1);
        for (std::size_t i = 0; i < n; ++i) advance();
    }

    double number() {
        const std::size_t begin = pos_;
        auto digits = [&] {
            const std::size_t d = pos_;
            while (!at_end() && peek() >= '0' && peek() <= '9') advance();
            return pos_ - d;
        };
        if (peek() == '-') advance();
        if (at_end()) throw error("invalid number", 1);
        if (peek() == '0') {
            advance();
        } else if (digits() == 0) {
            throw error("invalid number", 1);
        }
        if (!at_end() && peek() == '.') {
            advance();
            if (digits() == 0) throw error("invalid number: digits expected after '.'", 1);
        }
        if (!at_end() && (peek() == 'e' || peek() == 'E')) {
            advance();
            if (!at_end() && (peek() == '+' || peek() == '-')) advance();
            if (digits() == 0) throw error("invalid number: digits expected in exponent", 1);
        }
        const std::string token(text_.substr(begin, pos_ - begin));
        return std::strtod(token.c_str(), nullptr);
    }

    static void append_utf8(std::string& out, unsigned cp) {
        if (cp < 0x80) {
            out += static_cast<char>(cp);
        } else if (cp < 0x800) {
            out += static_cast<char>(0xC0 | (cp >> 6));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else if (cp < 0x10000) {
            out += static_cast<char>(0xE0 | (cp >> 12));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (cp >> 18));
            out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (cp & 0x3F));
        }
    }

    unsigned hex4() {
        unsigned cp = 0;
        for (int i = 0; i < 4; ++i) {
            if (at_end()) throw error("unterminated escape", 0);
            const char c = peek();
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<unsigned>(c - 'A' + 10);
            else throw error("invalid \\u escape", 1);
            advance();
        }
        return cp;
    }

    std::string string_literal() {
        expect('"', "'\"'");
        std::string out;
        while (true) {
            if (at_end()) throw error("unterminated string", 0);
            const char c = peek();
            if (c == '"') {
                advance();
                return out;
            }
            if (static_cast<unsigned char>(c) < 0x20) throw error("control character in string", 1);
            if (c == '\\') {
                advance();
                if (at_end()) throw error("unterminated escape", 0);
                const char e = peek();
                advance();
                switch (e) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case '/': out += '/'; break;
                    case 'b': out += '\b'; break;
                    case 'f': out += '\f'; break;
                    case 'n': out += '\n'; break;
                    case 'r': out += '\r'; break;
                    case 't': out += '\t'; break;
                    case 'u': {
                        unsigned cp = hex4();
                        if (cp >= 0xD800 && cp < 0xDC00) {
                            if (text_.substr(pos_, 2) != "\\u") throw error("unpaired surrogate", 1);
                            advance();
                            advance();
                            const unsigned lo = hex4();
                            if (lo < 0xDC00 || lo >= 0xE000) throw error("unpaired surrogate", 1);
                            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
                        }
                        append_utf8(out, cp);
                        break;
                    }
                    default: throw error(std::string("invalid escape '\\") + e + "'", 1);
                }
                continue;
            }
            // Copy a whole UTF-8 sequence.
            const std::size_t begin = pos_;
            advance();
            out.append(text_.substr(begin, pos_ - begin));
        }
    }

    Value array(int depth) {
        Value v = Value::array();
        expect('[', "'['");
        skip_ws();
        if (!at_end() && peek() == ']') {
            advance();
            return v;
        }
        while (true) {
            skip_ws();
            v.push(value(depth + 1));
            skip_ws();
            if (at_end()) throw error("unterminated array", 0);
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() == ']') {
                advance();
                return v;
            }
            throw error("expected ',' or ']'", 1);
        }
    }

    Value object(int depth) {
        Value v = Value::object();
        expect('{', "'{'");
        skip_ws();
        if (!at_end() && peek() == '}') {
            advance();
            return v;
        }
        while (true) {
            skip_ws();
            if (at_end() || peek() != '"') throw error("expected a quoted key", 1);
            SourceSpan key_span = here(0);
            std::string key = string_literal();
            key_span.length = pos_ - key_span.offset;
            skip_ws();
            expect(':', "':'");
            skip_ws();
            Value member = value(depth + 1);
            if (v.member(key))
                diags_.push_back({Severity::error, "DUPLICATE_KEY", "duplicate key \"" + key + "\"", key_span});
            else
                v.add_member(std::move(key), key_span, std::move(member));
            skip_ws();
            if (at_end()) throw error("unterminated object", 0);
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() == '}') {
                advance();
                return v;
            }
            throw error("expected ',' or '}'", 1);
        }
    }
};

}  // namespace

ParseResult parse(std::string_view text, std::string file) { return Parser(text, std::move(file)).run(); }

// ---------------------------------------------------------------------------
// Writer

namespace {

void write_string(std::string& out, const std::string& s) {
    out += '"';
    for (const unsigned char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            default:
                if (c < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += static_cast<char>(c);
                }
        }
    }
    out += '"';
}

bool is_scalar(const Value& v) { return !v.is_array() && !v.is_object(); }

void write_value(std::string& out, const Value& v, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (v.type()) {
        case Value::Type::null: out += "null"; break;
        case Value::Type::boolean: out += v.as_bool() ? "true" : "false"; break;
        case Value::Type::number: out += format_number(v.as_number()); break;
        case Value::Type::string: write_string(out, v.as_string()); break;
        case Value::Type::array: {
            if (v.items().empty()) {
                out += "[]";
                break;
            }
            const bool flat = std::all_of(v.items().begin(), v.items().end(), is_scalar);
            out += '[';
            for (std::size_t i = 0; i < v.items().size(); ++i) {
                if (flat) {
                    if (i) out += ", ";
                } else {
                    out += i ? ",\n" : "\n";
                    out += inner;
                }
                write_value(out, v.items()[i], indent + 1);
            }
            if (!flat) out += "\n" + pad;
            out += ']';
            break;
        }
        case Value::Type::object: {
            if (v.members().empty()) {
                out += "{}";
                break;
            }
            std::vector<const Value::Member*> sorted;
            for (const auto& m : v.members()) sorted.push_back(&m);
            std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->key < b->key; });
            out += '{';
            for (std::size_t i = 0; i < sorted.size(); ++i) {
                out += i ? ",\n" : "\n";
                out += inner;
                write_string(out, sorted[i]->key);
                out += ": ";
                write_value(out, sorted[i]->value, indent + 1);
            }
            out += "\n" + pad + '}';
            break;
        }
    }
}

}  // namespace

std::string write_canonical(const Value& v) {
    std::string out;
    write_value(out, v, 0);
    out += '\n';
    return out;
}

}  // namespace doc
}  // namespace practica
