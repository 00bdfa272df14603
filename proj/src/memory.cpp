#include "engram/memory.hpp"

#include <nlohmann/json.hpp>

#include "engram/errors.hpp"
#include "engram/heuristics.hpp"
#include "engram/text.hpp"

namespace engram {

using nlohmann::json;

std::string to_string(MemoryType type) {
    switch (type) {
        case MemoryType::episodic: return "episodic";
        case MemoryType::semantic: return "semantic";
        case MemoryType::procedural: return "procedural";
    }
    throw Error("unreachable memory type");
}

MemoryType memory_type_from_string(const std::string& name) {
    if (name == "episodic") return MemoryType::episodic;
    if (name == "semantic") return MemoryType::semantic;
    if (name == "procedural") return MemoryType::procedural;
    throw SchemaError("unknown memory type: " + name);
}

std::optional<std::string> TypedRecord::resolved_time() const {
    if (text::is_iso_timestamp(anchor)) return anchor;
    return std::nullopt;
}

namespace {

void check_turn(const DialogueTurn& turn) {
    if (text::collapse_whitespace(turn.text).empty())
        throw PreconditionError("dialogue turn has empty text");
    if (turn.speaker.empty()) throw PreconditionError("dialogue turn has empty speaker");
    if (turn.turn_index < 0) throw PreconditionError("dialogue turn has negative index");
}

using text::fill_slot;

// The provider is asked for a JSON object {"episodic":0|1,"semantic":0|1,
// "procedural":0|1}; anything else is unparseable.
std::optional<RouteDecision> parse_route_reply(const std::string& reply) {
    auto start = reply.find('{');
    auto end = reply.rfind('}');
    if (start == std::string::npos || end == std::string::npos || end < start)
        return std::nullopt;
    json doc = json::parse(reply.substr(start, end - start + 1), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    RouteDecision decision;
    auto read_bit = [&](const char* key, bool& out) {
        if (!doc.contains(key)) return false;
        const json& v = doc.at(key);
        if (v.is_boolean()) {
            out = v.get<bool>();
            return true;
        }
        if (v.is_number_integer()) {
            auto n = v.get<long long>();
            if (n != 0 && n != 1) return false;
            out = n == 1;
            return true;
        }
        return false;
    };
    if (!read_bit("episodic", decision.episodic)) return std::nullopt;
    if (!read_bit("semantic", decision.semantic)) return std::nullopt;
    if (!read_bit("procedural", decision.procedural)) return std::nullopt;
    return decision;
}

TypedRecord make_base_record(const DialogueTurn& turn, MemoryType type) {
    TypedRecord record;
    record.conversation_id = turn.conversation_id;
    record.speaker = turn.speaker;
    record.memory_type = type;
    record.anchor = turn.timestamp.empty() ? std::string("turn ") + std::to_string(turn.turn_index)
                                           : turn.timestamp;
    record.source_turn = turn.turn_index;
    return record;
}

TypedRecord template_record(const DialogueTurn& turn, MemoryType type) {
    TypedRecord record = make_base_record(turn, type);
    switch (type) {
        case MemoryType::episodic:
        case MemoryType::procedural:
            record.title = heuristics::clipped_title(turn.text);
            record.body = text::collapse_whitespace(turn.text);
            break;
        case MemoryType::semantic:
            record.title.clear();
            record.body = heuristics::restate_declarative(turn.speaker, turn.text);
            break;
    }
    return record;
}

// Provider replies with {"title": "...", "body": "..."}; a malformed reply
// falls back to the template and flags the record.
TypedRecord provider_record(const DialogueTurn& turn, MemoryType type,
                            const ExtractorPolicy& extractor) {
    std::string tpl = extractor.prompt_template.empty()
                          ? "Rewrite the utterance as a {TYPE} memory record. Reply with JSON "
                            "{\"title\": string, \"body\": string}.\nSpeaker: {SPEAKER}\n"
                            "Utterance: {UTTERANCE}"
                          : extractor.prompt_template;
    tpl = fill_slot(std::move(tpl), "{TYPE}", to_string(type));
    tpl = fill_slot(std::move(tpl), "{SPEAKER}", turn.speaker);
    tpl = fill_slot(std::move(tpl), "{UTTERANCE}", turn.text);

    ChatRequest request;
    request.user_text = tpl;
    request.model_tag = "memory-layer";

    auto fallback = [&] {
        TypedRecord record = template_record(turn, type);
        record.template_fallback = true;
        return record;
    };

    std::string reply;
    try {
        reply = extractor.provider->chat(request).answer_text;
    } catch (const Error&) {
        return fallback();
    }

    auto start = reply.find('{');
    auto end = reply.rfind('}');
    if (start == std::string::npos || end == std::string::npos || end < start) return fallback();
    json doc = json::parse(reply.substr(start, end - start + 1), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("body") ||
        !doc.at("body").is_string())
        return fallback();

    TypedRecord record = make_base_record(turn, type);
    record.body = text::collapse_whitespace(doc.at("body").get<std::string>());
    if (record.body.empty()) return fallback();
    if (type != MemoryType::semantic && doc.contains("title") && doc.at("title").is_string())
        record.title = text::collapse_whitespace(doc.at("title").get<std::string>());
    return record;
}

}  // namespace

RouteDecision route_heuristic(const DialogueTurn& turn) {
    check_turn(turn);
    RouteDecision decision;
    decision.episodic = heuristics::episodic_signal(turn.text);
    decision.semantic = heuristics::semantic_signal(turn.text);
    decision.procedural = heuristics::procedural_signal(turn.text);
    return decision;
}

RouteDecision route(const DialogueTurn& turn, const RouterPolicy& policy) {
    if (policy.kind == RouterPolicyKind::heuristic) return route_heuristic(turn);

    check_turn(turn);
    if (!policy.provider)
        throw RoutingError("provider router selected but no provider configured (turn " +
                           std::to_string(turn.turn_index) + ")");

    std::string tpl = policy.prompt_template.empty()
                          ? "Classify the utterance into memory types. Reply with JSON "
                            "{\"episodic\":0|1,\"semantic\":0|1,\"procedural\":0|1}.\n"
                            "Utterance: {UTTERANCE}"
                          : policy.prompt_template;
    tpl = fill_slot(std::move(tpl), "{UTTERANCE}", turn.text);

    ChatRequest request;
    request.user_text = tpl;
    request.model_tag = "memory-layer";

    std::string reply;
    try {
        reply = policy.provider->chat(request).answer_text;
    } catch (const Error& e) {
        if (policy.fallback_to_heuristic) return route_heuristic(turn);
        throw RoutingError("provider routing failed for turn " +
                           std::to_string(turn.turn_index) + ": " + e.what());
    }

    if (auto decision = parse_route_reply(reply)) return *decision;
    if (policy.fallback_to_heuristic) return route_heuristic(turn);
    throw RoutingError("unparseable router reply for turn " + std::to_string(turn.turn_index) +
                       ": " + reply);
}

std::vector<TypedRecord> extract(const DialogueTurn& turn, const RouteDecision& decision,
                                 const ExtractorPolicy& extractor) {
    check_turn(turn);
    if (extractor.kind == ExtractorPolicyKind::provider && !extractor.provider)
        throw PreconditionError("provider extractor selected but no provider configured");

    std::vector<TypedRecord> records;
    auto emit = [&](MemoryType type) {
        records.push_back(extractor.kind == ExtractorPolicyKind::template_based
                              ? template_record(turn, type)
                              : provider_record(turn, type, extractor));
    };
    if (decision.episodic) emit(MemoryType::episodic);
    if (decision.semantic) emit(MemoryType::semantic);
    if (decision.procedural) emit(MemoryType::procedural);
    return records;
}

}  // namespace engram
