#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "support/proc.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli() {
    const char* env = std::getenv("ENGRAM_CLI");
    REQUIRE_MESSAGE(env != nullptr, "ENGRAM_CLI must point at the engram binary");
    return env;
}

std::string fixtures() {
    const char* env = std::getenv("ENGRAM_FIXTURES");
    return env ? env : "fixtures";
}

std::string q(const std::string& s) { return "'" + s + "'"; }

struct TempDir {
    fs::path path;
    TempDir() {
        auto base = fs::temp_directory_path() / ("engram_cli_XXXXXX");
        std::string tmpl = base.string();
        REQUIRE(::mkdtemp(tmpl.data()) != nullptr);
        path = tmpl;
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
    CHECK(proc::run(cli() + " --help 2>&1").exit_code == 0);

    auto no_sub = proc::run(cli() + " 2>&1");
    CHECK(no_sub.exit_code == 2);

    auto bad_mode = proc::run(cli() + " query --db x.db --question w --conversation c"
                                      " --mode sideways 2>&1");
    CHECK(bad_mode.exit_code == 2);

    auto bad_k = proc::run(cli() + " --k 0 ingest --db x.db --dataset y.json 2>&1");
    CHECK(bad_k.exit_code == 2);
}

TEST_CASE("domain errors exit with 1") {
    TempDir tmp;
    auto missing_db = proc::run(cli() + " query --db " + q((tmp.path / "absent.db").string()) +
                                " --question w --conversation c 2>&1");
    CHECK(missing_db.exit_code == 1);
    CHECK(missing_db.output.find("error:") != std::string::npos);

    auto missing_dataset = proc::run(cli() + " ingest --db " +
                                     q((tmp.path / "new.db").string()) +
                                     " --dataset /nonexistent.json 2>&1");
    CHECK(missing_dataset.exit_code == 1);
}

TEST_CASE("ingest, query, inspect, and eval round-trip on the walkthrough") {
    TempDir tmp;
    const std::string db = q((tmp.path / "memory.db").string());
    const std::string dataset = q(fixtures() + "/walkthrough.json");
    const std::string script = q(fixtures() + "/walkthrough_mock.json");

    auto ingest = proc::run(cli() + " ingest --db " + db + " --dataset " + dataset);
    REQUIRE(ingest.exit_code == 0);
    CHECK(ingest.output == "epi=1 sem=1 pro=1\n");

    // idempotent: the second pass stores nothing new
    auto again = proc::run(cli() + " ingest --db " + db + " --dataset " + dataset);
    REQUIRE(again.exit_code == 0);
    CHECK(again.output == "epi=0 sem=0 pro=0\n");

    auto query = proc::run(cli() + " --mock-script " + script + " query --db " + db +
                           " --question 'Where does A live?' --conversation walkthrough-1");
    REQUIRE(query.exit_code == 0);
    CHECK(query.output.find("== fact cards ==") != std::string::npos);
    CHECK(query.output.find("[E1] A moved to Seattle (2024-05-10 / A)") != std::string::npos);
    CHECK(query.output.find("== answer ==\nA lives in Seattle [E1].") != std::string::npos);
    CHECK(query.output.find("valid=true") != std::string::npos);
    CHECK(query.output.find("cited=[E1]") != std::string::npos);
    CHECK(query.output.find("invalid=[]") != std::string::npos);

    auto prompt = proc::run(cli() + " --mock-script " + script + " query --db " + db +
                            " --question 'Where does A live?' --conversation walkthrough-1"
                            " --show-prompt");
    REQUIRE(prompt.exit_code == 0);
    CHECK(prompt.output.find("== prompt ==") != std::string::npos);
    CHECK(prompt.output.find("CITATION FACTS") != std::string::npos);

    auto inspect = proc::run(cli() + " inspect --db " + db + " --conversation walkthrough-1");
    REQUIRE(inspect.exit_code == 0);
    CHECK(inspect.output.find("episodic") != std::string::npos);
    CHECK(inspect.output.find("semantic") != std::string::npos);
    CHECK(inspect.output.find("procedural") != std::string::npos);
    CHECK(inspect.output.find("A's favorite color is green") != std::string::npos);

    const fs::path report_path = tmp.path / "report.json";
    auto eval = proc::run(cli() + " --mock-script " + script + " eval --db " + db +
                          " --dataset " + dataset + " --mode engram-r --mode full-context" +
                          " --report " + q(report_path.string()));
    REQUIRE(eval.exit_code == 0);
    CHECK(eval.output.find("engram_r") != std::string::npos);
    CHECK(eval.output.find("overall") != std::string::npos);

    std::ifstream in(report_path);
    REQUIRE(in.good());
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(blob.find("\"engram_r\"") != std::string::npos);
    CHECK(blob.find("\"full_context\"") != std::string::npos);
    CHECK(blob.find("\"timestamp\"") != std::string::npos);
}

TEST_CASE("full_context query needs the transcript") {
    TempDir tmp;
    const std::string db = q((tmp.path / "memory.db").string());
    const std::string dataset = q(fixtures() + "/walkthrough.json");
    proc::run(cli() + " ingest --db " + db + " --dataset " + dataset);

    auto missing = proc::run(cli() + " query --db " + db +
                             " --question 'Where does A live?' --conversation walkthrough-1"
                             " --mode full-context 2>&1");
    CHECK(missing.exit_code == 1);

    auto ok = proc::run(cli() + " --mock-script " + q(fixtures() + "/walkthrough_mock.json") +
                        " query --db " + db +
                        " --question 'Where does A live?' --conversation walkthrough-1"
                        " --mode full-context --dataset " + dataset);
    REQUIRE(ok.exit_code == 0);
    CHECK(ok.output.find("search_s=n/a") != std::string::npos);
}
