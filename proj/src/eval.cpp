#include "engram/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "engram/errors.hpp"
#include "engram/text.hpp"

namespace engram {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset loading

const Conversation* Dataset::find_conversation(const std::string& conversation_id) const {
    for (const auto& conversation : conversations)
        if (conversation.conversation_id == conversation_id) return &conversation;
    return nullptr;
}

namespace {

[[noreturn]] void schema_fail(const std::string& origin, const std::string& where,
                              const std::string& what) {
    throw SchemaError(origin + ": " + where + " " + what);
}

std::string require_string(const json& node, const char* field, const std::string& origin,
                           const std::string& where, bool allow_empty = false) {
    if (!node.contains(field) || !node.at(field).is_string())
        schema_fail(origin, where + "." + field, "must be a string");
    auto value = node.at(field).get<std::string>();
    if (!allow_empty && text::collapse_whitespace(value).empty())
        schema_fail(origin, where + "." + field, "must be non-empty");
    return value;
}

long long require_int(const json& node, const char* field, const std::string& origin,
                      const std::string& where) {
    if (!node.contains(field) || !node.at(field).is_number_integer())
        schema_fail(origin, where + "." + field, "must be an integer");
    return node.at(field).get<long long>();
}

}  // namespace

Dataset parse_dataset(const std::string& json_text, const std::string& origin) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw SchemaError(origin + ": dataset is not valid JSON");
    if (!doc.is_object() || !doc.contains("conversations") || !doc.contains("questions"))
        schema_fail(origin, "root", "must be an object with conversations and questions");

    Dataset dataset;
    std::unordered_set<std::string> conversation_ids;

    const json& conversations = doc.at("conversations");
    if (!conversations.is_array()) schema_fail(origin, "conversations", "must be an array");
    for (std::size_t ci = 0; ci < conversations.size(); ++ci) {
        const json& cnode = conversations[ci];
        std::string cwhere = "conversations[" + std::to_string(ci) + "]";
        Conversation conversation;
        conversation.conversation_id = require_string(cnode, "conversation_id", origin, cwhere);
        if (!conversation_ids.insert(conversation.conversation_id).second)
            schema_fail(origin, cwhere + ".conversation_id", "is a duplicate");

        if (!cnode.contains("turns") || !cnode.at("turns").is_array())
            schema_fail(origin, cwhere + ".turns", "must be an array");
        std::unordered_set<long long> turn_indexes;
        const json& turns = cnode.at("turns");
        for (std::size_t ti = 0; ti < turns.size(); ++ti) {
            const json& tnode = turns[ti];
            std::string twhere = cwhere + ".turns[" + std::to_string(ti) + "]";
            DialogueTurn turn;
            turn.conversation_id = conversation.conversation_id;
            turn.turn_index = require_int(tnode, "turn_index", origin, twhere);
            if (turn.turn_index < 0) schema_fail(origin, twhere + ".turn_index", "must be >= 0");
            if (!turn_indexes.insert(turn.turn_index).second)
                schema_fail(origin, twhere + ".turn_index", "is a duplicate within the conversation");
            turn.speaker = require_string(tnode, "speaker", origin, twhere);
            turn.text = require_string(tnode, "text", origin, twhere);
            turn.timestamp = require_string(tnode, "timestamp", origin, twhere);
            conversation.turns.push_back(std::move(turn));
        }
        std::sort(conversation.turns.begin(), conversation.turns.end(),
                  [](const DialogueTurn& a, const DialogueTurn& b) {
                      return a.turn_index < b.turn_index;
                  });
        dataset.conversations.push_back(std::move(conversation));
    }

    std::optional<std::unordered_set<std::string>> vocabulary;
    if (doc.contains("categories")) {
        if (!doc.at("categories").is_array())
            schema_fail(origin, "categories", "must be an array of strings");
        vocabulary.emplace();
        for (const auto& entry : doc.at("categories")) {
            if (!entry.is_string()) schema_fail(origin, "categories", "must contain only strings");
            vocabulary->insert(entry.get<std::string>());
        }
    }

    const json& questions = doc.at("questions");
    if (!questions.is_array()) schema_fail(origin, "questions", "must be an array");
    std::unordered_set<std::string> question_ids;
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        const json& qnode = questions[qi];
        std::string qwhere = "questions[" + std::to_string(qi) + "]";
        DatasetQuestion question;
        question.question_id = require_string(qnode, "question_id", origin, qwhere);
        if (!question_ids.insert(question.question_id).second)
            schema_fail(origin, qwhere + ".question_id", "is a duplicate");
        question.conversation_id = require_string(qnode, "conversation_id", origin, qwhere);
        if (!conversation_ids.count(question.conversation_id))
            schema_fail(origin, qwhere + ".conversation_id",
                        "references unknown conversation \"" + question.conversation_id + "\"");
        question.text = require_string(qnode, "text", origin, qwhere);
        question.gold_answer = require_string(qnode, "gold_answer", origin, qwhere);
        question.category = require_string(qnode, "category", origin, qwhere);
        if (vocabulary && !vocabulary->count(question.category))
            schema_fail(origin, qwhere + ".category",
                        "\"" + question.category + "\" is not in the declared vocabulary");
        dataset.questions.push_back(std::move(question));
    }
    return dataset;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StorageError("cannot open dataset: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Ingestion

std::string record_embedding_text(const TypedRecord& record) {
    if (!record.title.empty() && record.body.compare(0, record.title.size(), record.title) != 0)
        return record.title + ". " + record.body;
    return record.body;
}

std::string IngestSummary::line() const {
    std::ostringstream out;
    out << "epi=" << episodic << " sem=" << semantic << " pro=" << procedural;
    return out.str();
}

IngestSummary ingest(const Dataset& dataset, MemoryStore& store,
                     const IngestPolicies& policies) {
    if (!policies.encoder) throw PreconditionError("ingest requires an encoder");
    if (policies.encoder->dim() != store.encoder_dim())
        throw DimensionMismatchError(store.encoder_dim(), policies.encoder->dim(),
                                     "ingest encoder");

    IngestSummary summary;
    for (const auto& conversation : dataset.conversations) {
        for (const auto& turn : conversation.turns) {
            RouteDecision decision = route(turn, policies.router);
            for (auto& record : extract(turn, decision, policies.extractor)) {
                if (store.has_record(record.conversation_id, record.source_turn,
                                     record.memory_type)) {
                    ++summary.skipped_existing;
                    continue;
                }
                record.embedding = policies.encoder->embed(record_embedding_text(record));
                store.put(record);
                switch (record.memory_type) {
                    case MemoryType::episodic: ++summary.episodic; break;
                    case MemoryType::semantic: ++summary.semantic; break;
                    case MemoryType::procedural: ++summary.procedural; break;
                }
            }
            ++summary.turns_processed;
        }
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Judging

namespace {

bool containment_correct(const std::string& gold, const std::string& prediction) {
    auto gold_tokens = text::tokens(gold);
    auto prediction_tokens = text::tokens(prediction);
    std::unordered_set<std::string> have(prediction_tokens.begin(), prediction_tokens.end());
    if (gold_tokens.empty()) return false;
    for (const auto& tok : gold_tokens)
        if (!have.count(tok)) return false;
    return true;
}

}  // namespace

JudgeOutcome judge(const std::string& question, const std::string& gold,
                   const std::string& prediction, const JudgePolicy& policy) {
    JudgeOutcome outcome;
    if (policy.kind == JudgeKind::containment) {
        outcome.correct = containment_correct(gold, prediction);
        return outcome;
    }

    if (!policy.provider)
        throw PreconditionError("provider judge selected but no provider configured");
    std::string tpl = policy.prompt_template.empty() ? TemplateSet::builtin().judge
                                                     : policy.prompt_template;
    tpl = text::fill_slot(std::move(tpl), "{QUESTION}", question);
    tpl = text::fill_slot(std::move(tpl), "{GOLD}", gold);
    tpl = text::fill_slot(std::move(tpl), "{PREDICTION}", prediction);

    ChatRequest request;
    request.user_text = tpl;
    request.model_tag = "judge";

    ChatResult result = policy.provider->chat(request);
    outcome.usage = result.usage;

    std::string verdict = text::lower_ascii(text::collapse_whitespace(result.answer_text));
    if (verdict.rfind("incorrect", 0) == 0) {
        outcome.correct = false;
    } else if (verdict.rfind("correct", 0) == 0) {
        outcome.correct = true;
    } else {
        outcome.correct = false;
        outcome.parse_failed = true;
    }
    return outcome;
}

double percentile(std::vector<double> samples, double q) {
    if (samples.empty()) throw PreconditionError("percentile of an empty sample set");
    if (q <= 0.0 || q > 1.0) throw PreconditionError("percentile fraction must be in (0, 1]");
    std::sort(samples.begin(), samples.end());
    auto n = static_cast<double>(samples.size());
    // small epsilon so q*N values that are mathematically integral do not get
    // pushed to the next rank by float rounding (0.95*100 -> 95.000...01)
    auto rank = static_cast<long long>(std::ceil(q * n - 1e-9));
    rank = std::max<long long>(1, std::min<long long>(rank, samples.size()));
    return samples[static_cast<std::size_t>(rank - 1)];
}

// ---------------------------------------------------------------------------
// Per-question evaluation

QuestionResult answer_question(const DatasetQuestion& question, PromptMode mode,
                               const AnswerPipeline& pipeline) {
    if (!pipeline.chat) throw PreconditionError("answer pipeline requires a chat provider");

    QuestionResult result;
    result.question_id = question.question_id;
    result.category = question.category;
    result.mode = mode;

    using clock = std::chrono::steady_clock;
    auto seconds_between = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    const auto t_start = clock::now();

    try {
        Prompt prompt;
        FactCardSet cards;
        double search_s = 0.0;

        if (mode == PromptMode::full_context) {
            if (!pipeline.dataset)
                throw PreconditionError("full_context mode requires the dataset");
            const Conversation* conversation =
                pipeline.dataset->find_conversation(question.conversation_id);
            if (!conversation)
                throw NotFoundError("no conversation " + question.conversation_id);
            prompt = build_full_context_prompt(question.text, conversation->turns,
                                               pipeline.templates);
        } else {
            if (!pipeline.store || !pipeline.encoder)
                throw PreconditionError("retrieval modes require a store and an encoder");
            const auto t_search = clock::now();
            Query query =
                make_query(question.text, question.conversation_id, *pipeline.encoder);
            EvidenceBundle bundle = retrieve(*pipeline.store, query, pipeline.retrieval);
            if (mode == PromptMode::engram_r) {
                ClaimPolicy claim = pipeline.claim;
                claim.question = question.text;
                cards = render_set(bundle, claim);
                search_s = seconds_between(t_search, clock::now());
                prompt = build_engram_r_prompt(question.text, cards, bundle,
                                               pipeline.templates);
            } else {
                search_s = seconds_between(t_search, clock::now());
                prompt = build_engram_base_prompt(question.text, bundle, pipeline.templates);
            }
        }

        ChatRequest request;
        request.system_text = prompt.system_text;
        request.user_text = prompt.user_text;
        request.model_tag = "answering";
        request.max_output = pipeline.max_output;

        ChatResult chat_result = pipeline.chat->chat(request);
        result.answer_text = chat_result.answer_text;
        result.reasoning_text = chat_result.reasoning_text;
        result.input_tokens = chat_result.usage.input_tokens;
        result.output_tokens = chat_result.usage.output_tokens;
        result.reasoning_tokens = chat_result.usage.reasoning_tokens;
        result.usage_provenance = chat_result.usage.provenance;

        if (pipeline.deterministic_timing) {
            result.search_time_s = 0.0;
            result.total_time_s = chat_result.wall_time;
        } else {
            result.search_time_s = mode == PromptMode::full_context ? 0.0 : search_s;
            result.total_time_s = seconds_between(t_start, clock::now());
        }

        if (mode == PromptMode::engram_r) {
            result.has_citations = true;
            result.citations = check_answer(result.answer_text, cards);
        }

        JudgeOutcome verdict =
            judge(question.text, question.gold_answer, result.answer_text, pipeline.judge);
        result.judge_correct = verdict.correct;
        result.judge_parse_failed = verdict.parse_failed;
        result.judge_usage = verdict.usage;
    } catch (const Error& e) {
        result.errored = true;
        result.error_message = e.what();
        result.answer_text.clear();
        if (!pipeline.deterministic_timing)
            result.total_time_s = seconds_between(t_start, clock::now());
    }
    return result;
}

// ---------------------------------------------------------------------------
// Aggregation

namespace {

json citation_to_json(const CitationReport& report) {
    return json{{"cited", report.cited},
                {"invalid", report.invalid},
                {"uncited_answer", report.uncited_answer},
                {"valid", report.valid}};
}

json result_to_json(const QuestionResult& result) {
    json node{{"question_id", result.question_id},
              {"category", result.category},
              {"mode", to_string(result.mode)},
              {"answer_text", result.answer_text},
              {"errored", result.errored},
              {"judge_correct", result.judge_correct},
              {"input_tokens", result.input_tokens},
              {"output_tokens", result.output_tokens},
              {"reasoning_tokens", result.reasoning_tokens},
              {"search_time_s", result.search_time_s},
              {"total_time_s", result.total_time_s}};
    if (result.errored) node["error_message"] = result.error_message;
    if (result.judge_parse_failed) node["judge_parse_failed"] = true;
    if (result.has_citations) node["citations"] = citation_to_json(result.citations);
    return node;
}

json aggregate_to_json(const CategoryAggregate& agg) {
    return json{{"questions", agg.questions},
                {"answered", agg.answered},
                {"errored", agg.errored},
                {"judged", agg.judged},
                {"correct", agg.correct},
                {"judge_accuracy", agg.judge_accuracy},
                {"input_tokens", agg.input_tokens},
                {"output_tokens", agg.output_tokens},
                {"reasoning_tokens", agg.reasoning_tokens},
                {"search_p50_s", agg.search_p50},
                {"search_p95_s", agg.search_p95},
                {"total_p50_s", agg.total_p50},
                {"total_p95_s", agg.total_p95},
                {"in_totals", agg.in_totals}};
}

void fill_percentiles(CategoryAggregate& agg, std::vector<double> search,
                      std::vector<double> total) {
    if (!search.empty()) {
        agg.search_p50 = percentile(search, 0.5);
        agg.search_p95 = percentile(search, 0.95);
    }
    if (!total.empty()) {
        agg.total_p50 = percentile(total, 0.5);
        agg.total_p95 = percentile(total, 0.95);
    }
}

}  // namespace

ModeReport aggregate_report(std::vector<QuestionResult> results, PromptMode mode,
                            bool include_adversarial_tokens) {
    std::sort(results.begin(), results.end(),
              [](const QuestionResult& a, const QuestionResult& b) {
                  return a.question_id < b.question_id;
              });

    ModeReport report;
    report.mode = mode;

    std::map<std::string, std::vector<const QuestionResult*>> by_category;
    for (const auto& result : results) by_category[result.category].push_back(&result);

    std::vector<double> overall_search, overall_total;
    for (auto& [category, members] : by_category) {
        CategoryAggregate agg;
        const bool adversarial = category == kAdversarialCategory;
        agg.in_totals = !adversarial || include_adversarial_tokens;

        std::vector<double> search, total;
        for (const QuestionResult* result : members) {
            ++agg.questions;
            if (result->errored) {
                ++agg.errored;
                continue;
            }
            ++agg.answered;
            agg.input_tokens += result->input_tokens;
            agg.output_tokens += result->output_tokens;
            agg.reasoning_tokens += result->reasoning_tokens;
            search.push_back(result->search_time_s);
            total.push_back(result->total_time_s);
            ++agg.judged;
            if (result->judge_correct) ++agg.correct;
        }
        if (agg.judged > 0)
            agg.judge_accuracy = 100.0 * static_cast<double>(agg.correct) /
                                 static_cast<double>(agg.judged);
        fill_percentiles(agg, search, total);

        if (agg.in_totals) {
            report.overall.questions += agg.questions;
            report.overall.answered += agg.answered;
            report.overall.errored += agg.errored;
            report.overall.input_tokens += agg.input_tokens;
            report.overall.output_tokens += agg.output_tokens;
            report.overall.reasoning_tokens += agg.reasoning_tokens;
            overall_search.insert(overall_search.end(), search.begin(), search.end());
            overall_total.insert(overall_total.end(), total.begin(), total.end());
        }
        if (!adversarial) {
            report.overall.judged += agg.judged;
            report.overall.correct += agg.correct;
        }
        report.categories.emplace(category, std::move(agg));
    }

    if (report.overall.judged > 0)
        report.overall.judge_accuracy = 100.0 * static_cast<double>(report.overall.correct) /
                                        static_cast<double>(report.overall.judged);
    fill_percentiles(report.overall, std::move(overall_search), std::move(overall_total));

    for (const auto& result : results) {
        report.judge_tokens += result.judge_usage.input_tokens +
                               result.judge_usage.output_tokens +
                               result.judge_usage.reasoning_tokens;
        if (result.has_citations && !result.citations.valid) ++report.invalid_citation_answers;
    }
    report.results = std::move(results);
    return report;
}

EvalReport run_eval(const Dataset& dataset, const AnswerPipeline& pipeline,
                    const EvalOptions& options) {
    if (options.modes.empty()) throw PreconditionError("eval requires at least one mode");
    if (options.workers < 1) throw PreconditionError("eval requires at least one worker");

    EvalReport report;
    for (PromptMode mode : options.modes) {
        std::vector<QuestionResult> results(dataset.questions.size());
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;

        auto worker = [&] {
            while (true) {
                std::size_t index = next.fetch_add(1);
                if (index >= dataset.questions.size()) return;
                try {
                    results[index] = answer_question(dataset.questions[index], mode, pipeline);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };

        const auto worker_count = std::min<std::size_t>(
            static_cast<std::size_t>(options.workers),
            std::max<std::size_t>(dataset.questions.size(), 1));
        std::vector<std::thread> threads;
        threads.reserve(worker_count);
        for (std::size_t i = 0; i < worker_count; ++i) threads.emplace_back(worker);
        for (auto& thread : threads) thread.join();
        if (failure) std::rethrow_exception(failure);

        report.modes.push_back(
            aggregate_report(std::move(results), mode, options.include_adversarial_tokens));
    }

    std::vector<std::string> mode_names;
    for (PromptMode mode : options.modes) mode_names.push_back(to_string(mode));

    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);

    report.meta = json{{"config", options.config_snapshot.is_null()
                                      ? json::object()
                                      : options.config_snapshot},
                       {"dataset", options.dataset_path},
                       {"deterministic_timing", pipeline.deterministic_timing},
                       {"encoder", pipeline.encoder ? pipeline.encoder->name() : "none"},
                       {"judge", pipeline.judge.kind == JudgeKind::containment
                                     ? std::string("containment")
                                     : pipeline.judge.provider
                                           ? pipeline.judge.provider->name()
                                           : std::string("provider")},
                       {"modes", mode_names},
                       {"provider", pipeline.chat ? pipeline.chat->name() : "none"},
                       {"questions", dataset.questions.size()},
                       {"timestamp", stamp},
                       {"workers", options.workers}};
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering

json EvalReport::to_json() const {
    json mode_nodes = json::object();
    for (const auto& mode_report : modes) {
        json categories = json::object();
        for (const auto& [name, agg] : mode_report.categories)
            categories[name] = aggregate_to_json(agg);
        json results = json::array();
        for (const auto& result : mode_report.results) results.push_back(result_to_json(result));
        mode_nodes[to_string(mode_report.mode)] =
            json{{"categories", std::move(categories)},
                 {"overall", aggregate_to_json(mode_report.overall)},
                 {"judge_tokens", mode_report.judge_tokens},
                 {"invalid_citation_answers", mode_report.invalid_citation_answers},
                 {"results", std::move(results)}};
    }
    return json{{"meta", meta},
                {"memory_layer_tokens", memory_layer_tokens},
                {"modes", std::move(mode_nodes)}};
}

std::string EvalReport::render_table() const {
    std::ostringstream out;
    out << std::fixed;
    for (const auto& mode_report : modes) {
        out << "mode: " << to_string(mode_report.mode) << "\n";
        out << std::left << std::setw(16) << "category" << std::right << std::setw(5) << "qs"
            << std::setw(5) << "ans" << std::setw(5) << "err" << std::setw(8) << "acc%"
            << std::setw(10) << "in_tok" << std::setw(10) << "rsn_tok" << std::setw(12)
            << "search_p50" << std::setw(12) << "search_p95" << std::setw(11) << "total_p50"
            << std::setw(11) << "total_p95" << "\n";
        auto row = [&](const std::string& name, const CategoryAggregate& agg) {
            out << std::left << std::setw(16) << name << std::right << std::setw(5)
                << agg.questions << std::setw(5) << agg.answered << std::setw(5) << agg.errored
                << std::setw(8) << std::setprecision(1) << agg.judge_accuracy << std::setw(10)
                << agg.input_tokens << std::setw(10) << agg.reasoning_tokens << std::setw(12)
                << std::setprecision(4) << agg.search_p50 << std::setw(12) << agg.search_p95
                << std::setw(11) << agg.total_p50 << std::setw(11) << agg.total_p95 << "\n";
        };
        for (const auto& [name, agg] : mode_report.categories) row(name, agg);
        row("overall", mode_report.overall);
        out << "judge_tokens=" << mode_report.judge_tokens
            << " invalid_citation_answers=" << mode_report.invalid_citation_answers << "\n\n";
    }
    if (memory_layer_tokens > 0) out << "memory_layer_tokens=" << memory_layer_tokens << "\n";
    return out.str();
}

}  // namespace engram
