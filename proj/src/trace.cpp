#include "moonshot/trace.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "moonshot/config_file.hpp"
#include "moonshot/encoding.hpp"

namespace moonshot {

namespace {

uint64_t take_u64(std::string_view s, size_t& pos) {
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + s.size(), v);
    if (ec != std::errc() || ptr == s.data() + pos)
        throw ParseError("expected integer in trace at offset " + std::to_string(pos));
    pos = static_cast<size_t>(ptr - s.data());
    return v;
}

void take_lit(std::string_view s, size_t& pos, std::string_view lit) {
    if (s.substr(pos, lit.size()) != lit)
        throw ParseError("expected \"" + std::string(lit) + "\" in trace line \"" +
                         std::string(s.substr(0, 120)) + "\"");
    pos += lit.size();
}

SimConfig parse_config_line(const std::string& line) {
    SimConfig cfg;
    std::istringstream in(line);
    std::string token;
    in >> token;  // "config"
    while (in >> token) {
        size_t eq = token.find('=');
        if (eq == std::string::npos)
            throw ParseError("malformed config token \"" + token + "\"");
        apply_config_kv(cfg, token.substr(0, eq), token.substr(eq + 1));
    }
    return cfg;
}

TraceEvent parse_event_line(const std::string& line) {
    TraceEvent ev;
    ev.raw = line;
    std::string_view s = line;
    size_t pos = 0;
    take_lit(s, pos, "step=");
    ev.step = take_u64(s, pos);
    take_lit(s, pos, " | event=");
    if (s.substr(pos, 6) == "start(") {
        ev.kind = TraceEvent::Kind::Start;
        pos += 6;
    } else if (s.substr(pos, 8) == "deliver(") {
        ev.kind = TraceEvent::Kind::Deliver;
        pos += 8;
    } else if (s.substr(pos, 6) == "timer(") {
        ev.kind = TraceEvent::Kind::Timer;
        pos += 6;
    } else if (s.substr(pos, 7) == "inject(") {
        ev.kind = TraceEvent::Kind::Inject;
        pos += 7;
    } else {
        throw ParseError("unknown event in trace line \"" + line.substr(0, 120) + "\"");
    }
    take_lit(s, pos, "dst=");
    ev.dst = static_cast<ValidatorId>(take_u64(s, pos));
    if (ev.kind == TraceEvent::Kind::Deliver || ev.kind == TraceEvent::Kind::Inject) {
        take_lit(s, pos, ",msg=");
        ev.msg = parse_message(s, pos);
    }
    take_lit(s, pos, ")");
    take_lit(s, pos, " | outbox=[");
    // The outbox is not parsed: replay reproduces it from execution and
    // compares the whole rendered line against `raw`.
    return ev;
}

}  // namespace

ParsedTrace parse_trace(std::istream& in) {
    ParsedTrace t;
    std::string line;
    bool saw_header = false, saw_config = false, saw_report = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!saw_header) {
            if (line != "# moonshot-sim trace v1")
                throw ParseError("not a moonshot-sim trace: bad header line");
            saw_header = true;
        } else if (!saw_config) {
            if (line.rfind("config ", 0) != 0)
                throw ParseError("expected config line, got \"" + line.substr(0, 120) + "\"");
            t.config_line = line;
            t.cfg = parse_config_line(line);
            saw_config = true;
        } else if (line.rfind("step=", 0) == 0) {
            if (!t.tail.empty())
                throw ParseError("event line after the trace report");
            t.events.push_back(parse_event_line(line));
        } else if (line.rfind("VIOLATION ", 0) == 0 || line.rfind("report ", 0) == 0) {
            saw_report = saw_report || line.rfind("report ", 0) == 0;
            t.tail.push_back(line);
        } else {
            throw ParseError("unrecognized trace line \"" + line.substr(0, 120) + "\"");
        }
    }
    if (!saw_header) throw ParseError("empty trace");
    if (!saw_config) throw ParseError("trace has no config line");
    if (!saw_report) throw ParseError("trace has no report line");
    return t;
}

ParsedTrace load_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open trace file " + path);
    return parse_trace(in);
}

RunReport replay_trace(const ParsedTrace& t) {
    const std::string reproduced_config = render_config_line(t.cfg);
    if (reproduced_config != t.config_line)
        throw TraceMismatch("config line does not round-trip:\n  trace:    " + t.config_line +
                            "\n  rendered: " + reproduced_config);

    t.cfg.validate();
    SimCore core(t.cfg);
    RunReport report;
    std::optional<Violation> viol;
    uint64_t last_step = 0;

    for (size_t i = 0; i < t.events.size(); ++i) {
        const TraceEvent& ev = t.events[i];
        if (viol)
            throw TraceMismatch("violation at step " + std::to_string(last_step) +
                                " but the trace continues");
        std::vector<Outgoing> sent;
        std::string event_text;
        switch (ev.kind) {
            case TraceEvent::Kind::Start:
                viol = core.exec_start(ev.dst, sent);
                event_text = "start(dst=" + std::to_string(ev.dst) + ")";
                break;
            case TraceEvent::Kind::Deliver:
                viol = core.exec_deliver(ev.dst, *ev.msg, sent);
                event_text = "deliver(dst=" + std::to_string(ev.dst) + ",msg=" + encode(*ev.msg) + ")";
                break;
            case TraceEvent::Kind::Timer:
                viol = core.exec_timer(ev.dst, sent);
                event_text = "timer(dst=" + std::to_string(ev.dst) + ")";
                break;
            case TraceEvent::Kind::Inject:
                viol = core.exec_inject({ev.dst, *ev.msg}, sent);
                event_text = "inject(dst=" + std::to_string(ev.dst) + ",msg=" + encode(*ev.msg) + ")";
                break;
        }
        std::string reproduced = render_trace_event(ev.step, event_text, sent);
        if (reproduced != ev.raw)
            throw TraceMismatch("divergence at step " + std::to_string(ev.step) +
                                ":\n  trace:    " + ev.raw + "\n  replayed: " + reproduced);
        last_step = ev.step;
    }

    report.steps = viol ? last_step : t.cfg.max_steps;
    if (viol) {
        report.violation = viol;
        report.violation_step = last_step;
    }
    for (ValidatorId id : core.honest_ids())
        report.commits.emplace_back(id, core.validator(id).state().committed.size());
    report.warning_count = core.monitor().warnings().size();

    std::vector<std::string> tail;
    if (viol)
        tail.push_back("VIOLATION kind=" + viol->kind + " step=" + std::to_string(last_step) +
                       " detail=" + viol->detail);
    tail.push_back("report " + report.render());
    if (tail != t.tail) {
        std::string got, want;
        for (const std::string& l : tail) got += "\n  replayed: " + l;
        for (const std::string& l : t.tail) want += "\n  trace:    " + l;
        throw TraceMismatch("trace tail diverges:" + want + got);
    }
    return report;
}

std::vector<std::pair<uint64_t, Injection>> load_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SimError("cannot open script file " + path);
    std::vector<std::pair<uint64_t, Injection>> plan;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        size_t e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        try {
            std::string_view s = line;
            size_t pos = 0;
            take_lit(s, pos, "step=");
            uint64_t step = take_u64(s, pos);
            take_lit(s, pos, " dst=");
            auto dst = static_cast<ValidatorId>(take_u64(s, pos));
            take_lit(s, pos, " msg=");
            Message m = parse_message(s, pos);
            if (pos != s.size()) throw ParseError("trailing characters after message");
            plan.emplace_back(step, Injection{dst, std::move(m)});
        } catch (const ParseError& pe) {
            throw SimError("script line " + std::to_string(lineno) + ": " + pe.what());
        }
    }
    return plan;
}

}  // namespace moonshot
