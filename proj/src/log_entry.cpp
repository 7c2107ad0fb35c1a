#include "peacock/log_entry.hpp"

#include <charconv>

#include "peacock/encoding.hpp"
#include "peacock/errors.hpp"

namespace peacock::log {

namespace {

void require_quotable(const std::string& value) {
    if (value.find('\'') != std::string::npos)
        throw Error("log value may not contain a single quote: " + value);
    if (value.find('\n') != std::string::npos)
        throw Error("log value may not contain a newline");
}

void append_pairs(std::string& out, std::span<const NamedValue> pairs) {
    for (const auto& p : pairs) {
        require_quotable(p.value);
        out += ", ";
        out += p.name;
        out += ":'";
        out += p.value;
        out += '\'';
    }
}

const char* caller_kind_label(CallerKind kind) {
    switch (kind) {
        case CallerKind::Guid: return "GUID";
        case CallerKind::Path: return "Path";
        case CallerKind::Unknown: return "Unknown";
    }
    throw Error("invalid caller kind");
}

// --- strict cursor-based parser ---------------------------------------------

struct Cursor {
    std::string_view text;
    std::size_t pos = 0;

    bool done() const { return pos >= text.size(); }

    [[noreturn]] void fail(const std::string& expected) const { throw MalformedLine(pos, expected); }

    void literal(std::string_view lit) {
        if (text.substr(pos, lit.size()) != lit) fail("'" + std::string(lit) + "'");
        pos += lit.size();
    }

    bool try_literal(std::string_view lit) {
        if (text.substr(pos, lit.size()) != lit) return false;
        pos += lit.size();
        return true;
    }

    // Decimal integer, no leading zeros (so formatting is the exact inverse).
    uint64_t decimal() {
        std::size_t start = pos;
        while (!done() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (pos == start) fail("decimal digit");
        std::string_view digits = text.substr(start, pos - start);
        if (digits.size() > 1 && digits[0] == '0') throw MalformedLine(start, "no leading zeros");
        uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
        if (ec != std::errc()) throw MalformedLine(start, "integer in range");
        return value;
    }

    // Minimal-width uppercase hex address.
    uint64_t address() {
        std::size_t start = pos;
        while (!done() && ((text[pos] >= '0' && text[pos] <= '9') ||
                           (text[pos] >= 'A' && text[pos] <= 'F')))
            ++pos;
        if (pos == start) fail("uppercase hex digit");
        std::string_view digits = text.substr(start, pos - start);
        if (digits.size() > 1 && digits[0] == '0') throw MalformedLine(start, "no leading zeros");
        if (digits.size() > 16) throw MalformedLine(start, "address fits in 64 bits");
        return encoding::parse_address(digits);
    }

    std::string quoted_value() {
        literal("'");
        std::size_t start = pos;
        while (!done() && text[pos] != '\'') ++pos;
        if (done()) fail("closing quote");
        std::string value(text.substr(start, pos - start));
        ++pos;  // consume closing quote
        return value;
    }

    std::string identifier() {
        std::size_t start = pos;
        auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
        auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
        if (done() || !head(text[pos])) fail("identifier");
        ++pos;
        while (!done() && tail(text[pos])) ++pos;
        return std::string(text.substr(start, pos - start));
    }

    void end() {
        if (!done()) fail("end of line");
    }
};

bool is_guid_text(std::string_view s) {
    if (s.size() != 36) return false;
    for (std::size_t i = 0; i < 36; ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (s[i] != '-') return false;
        } else if (!((s[i] >= '0' && s[i] <= '9') || (s[i] >= 'A' && s[i] <= 'F'))) {
            return false;
        }
    }
    return true;
}

std::vector<NamedValue> parse_pairs(Cursor& c) {
    std::vector<NamedValue> pairs;
    while (c.try_literal(", ")) {
        NamedValue nv;
        nv.name = c.identifier();
        c.literal(":");
        nv.value = c.quoted_value();
        pairs.push_back(std::move(nv));
    }
    return pairs;
}

}  // namespace

std::string format_entry(const RawLogEntry& entry) {
    std::string out = "(LID:" + std::to_string(entry.lid) + ") (T:" + std::to_string(entry.t) +
                      ") (CID:" + std::to_string(entry.cid) + ") ";

    if (const auto* h = std::get_if<HeaderBody>(&entry.body)) {
        for (const auto* v : {&h->session_id, &h->vendor, &h->version, &h->release_date})
            require_quotable(*v);
        out += "[PeacockHeader] SessionID:'" + h->session_id + "', Vendor:'" + h->vendor +
               "', Version:'" + h->version + "', ReleaseDate:'" + h->release_date + "'";
    } else if (const auto* cc = std::get_if<CheckCallerBody>(&entry.body)) {
        require_quotable(cc->identity);
        if (cc->kind == CallerKind::Guid && !is_guid_text(cc->identity))
            throw Error("caller identity is not canonical GUID text: " + cc->identity);
        out += "[CheckCaller] Caller ";
        out += caller_kind_label(cc->kind);
        out += " - '" + cc->identity + "', start address " + encoding::address_hex(cc->start_address) +
               ", end address " + encoding::address_hex(cc->end_address);
    } else if (const auto* e = std::get_if<EnterBody>(&entry.body)) {
        out += "Enter " + e->service + " - Service Address:'" +
               encoding::address_hex(e->service_address) + "'";
        append_pairs(out, e->args);
    } else if (const auto* x = std::get_if<ExitBody>(&entry.body)) {
        require_quotable(x->ret_status);
        out += "Exit " + x->service + " - Service Address:'" +
               encoding::address_hex(x->service_address) + "'";
        append_pairs(out, x->outs);
        out += ", RetStatus:'" + x->ret_status + "'";
    } else if (const auto* hc = std::get_if<HookCheckBody>(&entry.body)) {
        require_quotable(hc->service);
        require_quotable(hc->hooked_by);
        out += "[HookCheck] Service:'" + hc->service + "', HookedBy:'" + hc->hooked_by +
               "', Whitelisted:'" + (hc->whitelisted ? "true" : "false") + "'";
    } else if (const auto* halt = std::get_if<HaltBody>(&entry.body)) {
        require_quotable(halt->reason);
        out += "[Halt] Reason:'" + halt->reason + "'";
    } else {
        throw Error("unhandled entry body");
    }
    return out;
}

RawLogEntry parse_entry(std::string_view line) {
    Cursor c{line};
    RawLogEntry entry;

    c.literal("(LID:");
    entry.lid = c.decimal();
    c.literal(") (T:");
    entry.t = c.decimal();
    c.literal(") (CID:");
    entry.cid = c.decimal();
    c.literal(") ");

    if (c.try_literal("[PeacockHeader] ")) {
        HeaderBody h;
        c.literal("SessionID:");
        h.session_id = c.quoted_value();
        c.literal(", Vendor:");
        h.vendor = c.quoted_value();
        c.literal(", Version:");
        h.version = c.quoted_value();
        c.literal(", ReleaseDate:");
        h.release_date = c.quoted_value();
        c.end();
        entry.body = std::move(h);
    } else if (c.try_literal("[CheckCaller] Caller ")) {
        CheckCallerBody cc;
        if (c.try_literal("GUID"))
            cc.kind = CallerKind::Guid;
        else if (c.try_literal("Path"))
            cc.kind = CallerKind::Path;
        else if (c.try_literal("Unknown"))
            cc.kind = CallerKind::Unknown;
        else
            c.fail("caller kind (GUID/Path/Unknown)");
        c.literal(" - ");
        std::size_t identity_at = c.pos + 1;  // first char inside the quotes
        cc.identity = c.quoted_value();
        if (cc.kind == CallerKind::Guid && !is_guid_text(cc.identity)) {
            // Pin the error to the first offending character inside the GUID.
            std::size_t k = 0;
            while (k < cc.identity.size() && k < 36) {
                char ch = cc.identity[k];
                bool ok = (k == 8 || k == 13 || k == 18 || k == 23)
                              ? ch == '-'
                              : ((ch >= '0' && ch <= '9') || (ch >= 'A' && ch <= 'F'));
                if (!ok) break;
                ++k;
            }
            throw MalformedLine(identity_at + k, "canonical GUID text");
        }
        c.literal(", start address ");
        cc.start_address = c.address();
        c.literal(", end address ");
        cc.end_address = c.address();
        c.end();
        entry.body = std::move(cc);
    } else if (c.try_literal("[HookCheck] ")) {
        HookCheckBody hc;
        c.literal("Service:");
        hc.service = c.quoted_value();
        c.literal(", HookedBy:");
        hc.hooked_by = c.quoted_value();
        c.literal(", Whitelisted:");
        std::size_t flag_at = c.pos + 1;
        std::string flag = c.quoted_value();
        if (flag == "true")
            hc.whitelisted = true;
        else if (flag == "false")
            hc.whitelisted = false;
        else
            throw MalformedLine(flag_at, "'true' or 'false'");
        c.end();
        entry.body = std::move(hc);
    } else if (c.try_literal("[Halt] ")) {
        HaltBody halt;
        c.literal("Reason:");
        halt.reason = c.quoted_value();
        c.end();
        entry.body = std::move(halt);
    } else if (c.try_literal("Enter ")) {
        EnterBody e;
        e.service = c.identifier();
        c.literal(" - Service Address:");
        std::size_t addr_at = c.pos + 1;
        std::string addr = c.quoted_value();
        e.service_address = [&] {
            try {
                Cursor inner{addr};
                uint64_t v = inner.address();
                inner.end();
                return v;
            } catch (const MalformedLine& m) {
                throw MalformedLine(addr_at + m.offset, m.expected);
            }
        }();
        e.args = parse_pairs(c);
        c.end();
        entry.body = std::move(e);
    } else if (c.try_literal("Exit ")) {
        ExitBody x;
        x.service = c.identifier();
        c.literal(" - Service Address:");
        std::size_t addr_at = c.pos + 1;
        std::string addr = c.quoted_value();
        x.service_address = [&] {
            try {
                Cursor inner{addr};
                uint64_t v = inner.address();
                inner.end();
                return v;
            } catch (const MalformedLine& m) {
                throw MalformedLine(addr_at + m.offset, m.expected);
            }
        }();
        auto pairs = parse_pairs(c);
        c.end();
        if (pairs.empty() || pairs.back().name != "RetStatus")
            throw MalformedLine(line.size(), "trailing RetStatus pair");
        x.ret_status = std::move(pairs.back().value);
        pairs.pop_back();
        x.outs = std::move(pairs);
        entry.body = std::move(x);
    } else {
        c.fail("record body (Enter/Exit/[PeacockHeader]/[CheckCaller]/[HookCheck]/[Halt])");
    }
    return entry;
}

ChainState chain_step(const ChainState& state, std::string_view line) {
    crypto::Digest32 m = crypto::sha256(line);
    ChainState next;
    next.pcr = crypto::sha256_concat(state.pcr, m);
    return next;
}

ChainState chain_evaluate(std::span<const std::string> lines, ChainState initial) {
    ChainState state = initial;
    for (const auto& line : lines) state = chain_step(state, line);
    return state;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.emplace_back(text.substr(start));
            break;
        }
        lines.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

}  // namespace peacock::log
