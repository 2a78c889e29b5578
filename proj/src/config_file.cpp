#include "moonshot/config_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace moonshot {

namespace {

uint64_t parse_u64(const std::string& s) {
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw SimError("expected integer, got \"" + s + "\"");
    return v;
}

std::string strip(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Comma-separated items, with an optional [..] wrapper; empty means none.
std::vector<std::string> parse_list(const std::string& s) {
    std::string body = s;
    if (!body.empty() && body.front() == '[') {
        if (body.back() != ']') throw SimError("unterminated list \"" + s + "\"");
        body = body.substr(1, body.size() - 2);
    }
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < body.size()) {
        size_t comma = body.find(',', pos);
        if (comma == std::string::npos) comma = body.size();
        std::string item = strip(body.substr(pos, comma - pos));
        if (!item.empty()) out.push_back(item);
        pos = comma + 1;
    }
    return out;
}

}  // namespace

Rational parse_rational(const std::string& s) {
    if (s.empty()) throw SimError("empty probability");
    size_t slash = s.find('/');
    if (slash != std::string::npos) {
        Rational r{parse_u64(s.substr(0, slash)), parse_u64(s.substr(slash + 1))};
        if (r.den == 0) throw SimError("probability with zero denominator: \"" + s + "\"");
        return r;
    }
    size_t dot = s.find('.');
    if (dot == std::string::npos) return {parse_u64(s), 1};
    std::string frac = s.substr(dot + 1);
    if (frac.empty() || frac.size() > 18)
        throw SimError("unparseable probability \"" + s + "\"");
    uint64_t den = 1;
    for (size_t i = 0; i < frac.size(); ++i) den *= 10;
    uint64_t whole = dot == 0 ? 0 : parse_u64(s.substr(0, dot));
    return {whole * den + parse_u64(frac), den};
}

void apply_config_kv(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "f") {
        cfg.f = static_cast<uint32_t>(parse_u64(value));
    } else if (key == "byzantine") {
        cfg.byzantine.clear();
        for (const std::string& item : parse_list(value))
            cfg.byzantine.push_back(static_cast<ValidatorId>(parse_u64(item)));
    } else if (key == "seed") {
        cfg.seed = parse_u64(value);
    } else if (key == "max_steps") {
        cfg.max_steps = parse_u64(value);
    } else if (key == "drop_probability") {
        cfg.drop = parse_rational(value);
    } else if (key == "duplicate_probability") {
        cfg.duplicate = parse_rational(value);
    } else if (key == "adversary_strategy") {
        cfg.adversaries = parse_list(value);
        if (cfg.adversaries.empty()) cfg.adversaries.push_back("passive");
    } else if (key == "timer_policy") {
        if (value == "random") cfg.timer_policy = SimConfig::TimerPolicy::Random;
        else if (value == "idle_only") cfg.timer_policy = SimConfig::TimerPolicy::IdleOnly;
        else throw SimError("unknown timer_policy \"" + value + "\"");
    } else if (key == "mutations") {
        cfg.mutations = 0;
        for (const std::string& item : parse_list(value)) {
            auto m = mutation_from_name(item);
            if (!m) throw SimError("unknown mutation \"" + item + "\"");
            cfg.mutations |= *m;
        }
    } else {
        throw SimError("unknown config key \"" + key + "\"");
    }
}

SimConfig parse_config_text(const std::string& text) {
    SimConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw SimError("config line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_config_kv(cfg, strip(line.substr(0, eq)), strip(line.substr(eq + 1)));
        } catch (const SimError& e) {
            throw SimError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace moonshot
