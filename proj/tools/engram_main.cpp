// engram: ingest dialogue into typed memory, answer questions with cited
// evidence, and compare prompt modes on a dataset.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "engram/citation.hpp"
#include "engram/config.hpp"
#include "engram/errors.hpp"
#include "engram/eval.hpp"
#include "engram/factcards.hpp"
#include "engram/memory.hpp"
#include "engram/prompting.hpp"
#include "engram/providers.hpp"
#include "engram/retrieval.hpp"
#include "engram/store.hpp"

namespace {

using namespace engram;

struct Runtime {
    Config config;
    TemplateSet templates;
    RetrievalConfig retrieval;
    std::unique_ptr<EmbeddingProvider> encoder;
    std::unique_ptr<ChatProvider> chat;
    bool deterministic_timing = false;
};

Runtime make_runtime(const std::string& config_path, const std::string& mock_script,
                     int k_override) {
    Runtime rt;
    if (!config_path.empty()) rt.config = Config::load(config_path);

    std::string template_dir = rt.config.get_string("prompt.template_dir", "");
    rt.templates =
        template_dir.empty() ? TemplateSet::builtin() : TemplateSet::load_dir(template_dir);

    rt.retrieval.k_per_type = static_cast<int>(
        rt.config.get_int("retrieval.k", rt.retrieval.k_per_type));
    rt.retrieval.budget =
        rt.config.get_int("retrieval.budget", rt.retrieval.budget);
    rt.retrieval.split_by_speaker = rt.config.get_bool("retrieval.split_by_speaker", true);
    if (k_override > 0) {
        rt.retrieval.k_per_type = k_override;
        rt.retrieval.budget = k_override;
    }

    HttpProviderOptions http;
    http.retries = static_cast<int>(rt.config.get_int("provider.retries", http.retries));
    http.timeout_s = rt.config.get_double("provider.timeout_s", http.timeout_s);
    http.max_inflight =
        static_cast<int>(rt.config.get_int("provider.max_inflight", http.max_inflight));

    int dim = static_cast<int>(rt.config.get_int("encoder.dim", 32));
    auto seed = static_cast<std::uint64_t>(rt.config.get_int("encoder.seed", 1));
    if (auto remote = HttpEmbeddingProvider::from_env(http, dim))
        rt.encoder = std::move(remote);
    else
        rt.encoder = std::make_unique<MockEncoder>(dim, seed);

    bool local_chat = true;
    if (!mock_script.empty()) {
        rt.chat = std::make_unique<MockChatProvider>(MockScript::load(mock_script));
    } else if (auto remote = HttpChatProvider::from_env(http)) {
        rt.chat = std::move(remote);
        local_chat = false;
    } else {
        rt.chat = std::make_unique<MockChatProvider>();  // echo fallback
    }
    // local providers have no meaningful wall clock; default to scripted times
    rt.deterministic_timing = rt.config.get_bool("eval.deterministic_timing", local_chat);
    return rt;
}

RouterPolicy make_router(const Runtime& rt, ChatProvider* provider) {
    RouterPolicy policy;
    std::string kind = rt.config.get_string("router.policy", "heuristic");
    if (kind == "provider") {
        policy.kind = RouterPolicyKind::provider;
        policy.provider = provider;
        policy.prompt_template = rt.templates.router;
    } else if (kind != "heuristic") {
        throw SchemaError("router.policy must be \"heuristic\" or \"provider\"");
    }
    return policy;
}

ExtractorPolicy make_extractor(const Runtime& rt, ChatProvider* provider) {
    ExtractorPolicy policy;
    std::string kind = rt.config.get_string("extractor.policy", "template");
    if (kind == "provider") {
        policy.kind = ExtractorPolicyKind::provider;
        policy.provider = provider;
        policy.prompt_template = rt.templates.extractor;
    } else if (kind != "template") {
        throw SchemaError("extractor.policy must be \"template\" or \"provider\"");
    }
    return policy;
}

ClaimPolicy make_claim(const Runtime& rt, ChatProvider* provider) {
    ClaimPolicy policy;
    policy.max_claim_chars = static_cast<std::size_t>(
        rt.config.get_int("claim.max_chars", static_cast<long long>(policy.max_claim_chars)));
    std::string kind = rt.config.get_string("claim.policy", "template");
    if (kind == "provider") {
        policy.kind = ClaimPolicyKind::provider;
        policy.provider = provider;
        policy.prompt_template = rt.templates.claim;
    } else if (kind != "template") {
        throw SchemaError("claim.policy must be \"template\" or \"provider\"");
    }
    return policy;
}

JudgePolicy make_judge(const Runtime& rt, ChatProvider* provider) {
    JudgePolicy policy;
    std::string kind = rt.config.get_string("eval.judge", "containment");
    if (kind == "provider") {
        policy.kind = JudgeKind::provider;
        policy.provider = provider;
        policy.prompt_template = rt.templates.judge;
    } else if (kind != "containment") {
        throw SchemaError("eval.judge must be \"containment\" or \"provider\"");
    }
    return policy;
}

PromptMode parse_mode(std::string name) {
    for (auto& c : name)
        if (c == '-') c = '_';
    return prompt_mode_from_string(name);
}

std::string bracket_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out + "]";
}

void require_db(const std::string& db_path) {
    if (!std::filesystem::exists(db_path))
        throw StorageError("no database at " + db_path + " (run ingest first)");
}

int cmd_ingest(const std::string& db_path, const std::string& dataset_path, Runtime& rt) {
    Dataset dataset = load_dataset(dataset_path);
    MemoryStore store(db_path, rt.encoder->dim());
    UsageTrackingChatProvider memory_tracker(*rt.chat);

    IngestPolicies policies;
    policies.router = make_router(rt, &memory_tracker);
    policies.extractor = make_extractor(rt, &memory_tracker);
    policies.encoder = rt.encoder.get();

    IngestSummary summary = ingest(dataset, store, policies);
    std::cout << summary.line() << "\n";
    if (summary.skipped_existing > 0)
        std::cerr << "skipped " << summary.skipped_existing << " already-stored records\n";
    return 0;
}

int cmd_query(const std::string& db_path, const std::string& question,
              const std::string& conversation_id, const std::string& mode_name,
              const std::string& dataset_path, bool show_prompt, Runtime& rt) {
    PromptMode mode = parse_mode(mode_name);
    UsageTrackingChatProvider card_tracker(*rt.chat);

    using clock = std::chrono::steady_clock;
    auto seconds_since = [](clock::time_point from) {
        return std::chrono::duration<double>(clock::now() - from).count();
    };
    const auto t_start = clock::now();

    Prompt prompt;
    FactCardSet cards;
    double search_s = 0.0;

    if (mode == PromptMode::full_context) {
        if (dataset_path.empty())
            throw PreconditionError("full_context mode needs --dataset for the transcript");
        Dataset dataset = load_dataset(dataset_path);
        const Conversation* conversation = dataset.find_conversation(conversation_id);
        if (!conversation)
            throw NotFoundError("no conversation " + conversation_id + " in " + dataset_path);
        prompt = build_full_context_prompt(question, conversation->turns, rt.templates);
    } else {
        require_db(db_path);
        MemoryStore store(db_path, rt.encoder->dim());
        const auto t_search = clock::now();
        Query query = make_query(question, conversation_id, *rt.encoder);
        EvidenceBundle bundle = retrieve(store, query, rt.retrieval);
        if (mode == PromptMode::engram_r) {
            ClaimPolicy claim = make_claim(rt, &card_tracker);
            claim.question = question;
            cards = render_set(bundle, claim);
            search_s = seconds_since(t_search);
            prompt = build_engram_r_prompt(question, cards, bundle, rt.templates);
        } else {
            search_s = seconds_since(t_search);
            prompt = build_engram_base_prompt(question, bundle, rt.templates);
        }
    }

    ChatRequest request;
    request.system_text = prompt.system_text;
    request.user_text = prompt.user_text;
    request.model_tag = "answering";
    ChatResult result = rt.chat->chat(request);

    double total_s = rt.deterministic_timing ? result.wall_time : seconds_since(t_start);
    if (rt.deterministic_timing) search_s = 0.0;

    if (show_prompt) {
        std::cout << "== prompt ==\n";
        if (!prompt.system_text.empty()) std::cout << prompt.system_text << "\n---\n";
        std::cout << prompt.user_text << "\n";
    }
    if (mode == PromptMode::engram_r) {
        std::cout << "== fact cards ==\n";
        std::string lines = cards.render_lines();
        std::cout << (lines.empty() ? "(none)\n" : lines);
    }
    std::cout << "== answer ==\n" << result.answer_text << "\n";
    if (mode == PromptMode::engram_r) {
        CitationReport report = check_answer(result.answer_text, cards);
        std::cout << "== citations ==\n"
                  << "valid=" << (report.valid ? "true" : "false") << "\n"
                  << "cited=" << bracket_list(report.cited) << "\n"
                  << "invalid=" << bracket_list(report.invalid) << "\n"
                  << "uncited_answer=" << (report.uncited_answer ? "true" : "false") << "\n";
    }
    std::cout << "== timing ==\n" << std::fixed << std::setprecision(6);
    if (mode == PromptMode::full_context)
        std::cout << "search_s=n/a";
    else
        std::cout << "search_s=" << search_s;
    std::cout << " total_s=" << total_s << "\n";
    return 0;
}

int cmd_eval(const std::string& db_path, const std::string& dataset_path,
             const std::vector<std::string>& mode_names, const std::string& report_path,
             Runtime& rt) {
    Dataset dataset = load_dataset(dataset_path);

    std::vector<PromptMode> modes;
    bool needs_store = false;
    for (const auto& name : mode_names) {
        modes.push_back(parse_mode(name));
        needs_store |= modes.back() != PromptMode::full_context;
    }

    std::optional<MemoryStore> store;
    if (needs_store) {
        require_db(db_path);
        store.emplace(db_path, rt.encoder->dim());
    }

    UsageTrackingChatProvider answer_tracker(*rt.chat);
    UsageTrackingChatProvider memory_tracker(*rt.chat);
    UsageTrackingChatProvider judge_tracker(*rt.chat);

    AnswerPipeline pipeline;
    pipeline.store = store ? &*store : nullptr;
    pipeline.dataset = &dataset;
    pipeline.chat = &answer_tracker;
    pipeline.encoder = rt.encoder.get();
    pipeline.retrieval = rt.retrieval;
    pipeline.templates = rt.templates;
    pipeline.claim = make_claim(rt, &memory_tracker);
    pipeline.judge = make_judge(rt, &judge_tracker);
    pipeline.deterministic_timing = rt.deterministic_timing;

    EvalOptions options;
    options.modes = modes;
    options.workers = static_cast<int>(rt.config.get_int("eval.workers", options.workers));
    options.include_adversarial_tokens =
        rt.config.get_bool("eval.include_adversarial_tokens", false);
    options.dataset_path = dataset_path;
    options.config_snapshot = rt.config.snapshot();

    EvalReport report = run_eval(dataset, pipeline, options);
    Usage memory_usage = memory_tracker.total();
    report.memory_layer_tokens = memory_usage.input_tokens + memory_usage.output_tokens +
                                 memory_usage.reasoning_tokens;

    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw StorageError("cannot write report to " + report_path);
        out << report.to_json().dump(2) << "\n";
        std::cerr << "report written to " << report_path << "\n";
    }
    std::cout << report.render_table();
    return 0;
}

int cmd_inspect(const std::string& db_path, const std::string& conversation_id,
                const std::string& question, Runtime& rt) {
    require_db(db_path);
    MemoryStore store(db_path, 0);

    if (!question.empty()) {
        if (conversation_id.empty())
            throw PreconditionError("inspect with --question needs --conversation");
        if (store.encoder_dim() != rt.encoder->dim())
            throw DimensionMismatchError(store.encoder_dim(), rt.encoder->dim(),
                                         "inspect encoder");
        Query query = make_query(question, conversation_id, *rt.encoder);
        EvidenceBundle bundle = retrieve(store, query, rt.retrieval);
        std::cout << "== evidence ==\n";
        for (const auto& candidate : bundle.flatten())
            std::cout << serialize_record(candidate.record) << "\n";
        ClaimPolicy claim;  // plain template cards; no chat involved
        claim.question = question;
        FactCardSet cards = render_set(bundle, claim);
        std::cout << "== fact cards ==\n";
        std::string lines = cards.render_lines();
        std::cout << (lines.empty() ? "(none)\n" : lines);
        return 0;
    }

    std::vector<std::string> conversations;
    if (!conversation_id.empty())
        conversations.push_back(conversation_id);
    else
        conversations = store.conversation_ids();

    for (const auto& conversation : conversations) {
        for (const auto& record : store.get_all(conversation)) {
            std::cout << conversation << " #" << record.record_id << " "
                      << to_string(record.memory_type) << " " << record.speaker << " | "
                      << record.anchor << " | ";
            if (!record.title.empty()) std::cout << record.title << " | ";
            std::cout << record.body << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"typed conversational memory with cited retrieval"};
    app.require_subcommand(1);

    std::string config_path, mock_script;
    int k_override = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--mock-script", mock_script, "scripted chat replies (JSON)");
    app.add_option("--k", k_override, "evidence budget; also caps per-bucket candidates")
        ->check(CLI::PositiveNumber);

    auto* ingest_cmd = app.add_subcommand("ingest", "route and store dialogue turns");
    std::string ingest_db, ingest_dataset;
    ingest_cmd->add_option("--db", ingest_db, "memory database")->required();
    ingest_cmd->add_option("--dataset", ingest_dataset, "dataset JSON")->required();

    auto* query_cmd = app.add_subcommand("query", "answer one question with citations");
    std::string query_db, query_text, query_conversation, query_dataset;
    std::string query_mode = "engram_r";
    bool query_show_prompt = false;
    query_cmd->add_option("--db", query_db, "memory database")->required();
    query_cmd->add_option("--question", query_text, "question text")->required();
    query_cmd->add_option("--conversation", query_conversation, "conversation id")->required();
    query_cmd->add_option("--mode", query_mode, "prompt mode")
        ->check(CLI::IsMember({"full_context", "full-context", "engram_base", "engram-base",
                               "engram_r", "engram-r"}));
    query_cmd->add_option("--dataset", query_dataset, "dataset JSON (full_context transcript)");
    query_cmd->add_flag("--show-prompt", query_show_prompt, "print the built prompt");

    auto* eval_cmd = app.add_subcommand("eval", "run a dataset through prompt modes");
    std::string eval_db, eval_dataset, eval_report;
    std::vector<std::string> eval_modes;
    eval_cmd->add_option("--db", eval_db, "memory database")->required();
    eval_cmd->add_option("--dataset", eval_dataset, "dataset JSON")->required();
    eval_cmd->add_option("--mode", eval_modes, "prompt mode (repeatable)")
        ->check(CLI::IsMember({"full_context", "full-context", "engram_base", "engram-base",
                               "engram_r", "engram-r"}));
    eval_cmd->add_option("--report", eval_report, "write the JSON report here");

    auto* inspect_cmd = app.add_subcommand("inspect", "dump stored records or retrieval");
    std::string inspect_db, inspect_conversation, inspect_question;
    inspect_cmd->add_option("--db", inspect_db, "memory database")->required();
    inspect_cmd->add_option("--conversation", inspect_conversation, "conversation id");
    inspect_cmd->add_option("--question", inspect_question, "retrieve for this question");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        Runtime rt = make_runtime(config_path, mock_script, k_override);
        if (*ingest_cmd) return cmd_ingest(ingest_db, ingest_dataset, rt);
        if (*query_cmd)
            return cmd_query(query_db, query_text, query_conversation, query_mode,
                             query_dataset, query_show_prompt, rt);
        if (*eval_cmd) {
            if (eval_modes.empty()) eval_modes.push_back("engram_r");
            return cmd_eval(eval_db, eval_dataset, eval_modes, eval_report, rt);
        }
        if (*inspect_cmd) return cmd_inspect(inspect_db, inspect_conversation, inspect_question, rt);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const engram::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
}
