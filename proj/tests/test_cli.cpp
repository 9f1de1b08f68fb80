#include "brb/cli.hpp"

#include "catch_amalgamated.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace brb;
namespace fs = std::filesystem;

namespace {

const std::string kData = BRB_DATA_DIR;
const std::string kTable1 = kData + "/behavioral-impact.kb";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> all_inputs(const std::string& value) {
    std::vector<std::string> args{"assess", "--kb", kTable1};
    for (const char* name : {"LandType", "WaterRemoval", "Drainage", "SoilTexture", "pH"}) {
        args.push_back("--in");
        args.push_back(std::string(name) + "=" + value);
    }
    return args;
}

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("brb-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("assess prints the score for extreme inputs", "[cli][assess]") {
    auto high = run(all_inputs("1"));
    REQUIRE(high.code == 0);
    REQUIRE(high.out.find("Score:     100.00") != std::string::npos);

    auto low = run(all_inputs("0"));
    REQUIRE(low.code == 0);
    REQUIRE(low.out.find("Score:     0.00") != std::string::npos);

    auto args = all_inputs("1");
    args.push_back("--format");
    args.push_back("structured");
    const auto j = io::Json::parse(run(args).out);
    REQUIRE(j["score"] == 100.0);
    REQUIRE(j["beliefs"] == io::Json::array({1.0, 0.0, 0.0}));
    REQUIRE(j["top_rules"].size() == 1);
}

TEST_CASE("assess with a missing attribute reports a residual interval", "[cli][assess]") {
    auto args = all_inputs("1");
    args.resize(args.size() - 2); // drop pH
    auto r = run(args);
    REQUIRE(r.code == 0);
    REQUIRE(r.out.find("interval") != std::string::npos);
    args.push_back("--format");
    args.push_back("structured");
    const auto j = io::Json::parse(run(args).out);
    REQUIRE(j["residual"].get<double>() > 0.0);
    REQUIRE(j["score_interval"][1].get<double>() > j["score_interval"][0].get<double>());
}

TEST_CASE("assess prints top five activated rules", "[cli][assess]") {
    auto r = run(all_inputs("0.75"));
    REQUIRE(r.code == 0);
    std::size_t lines = 0;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) lines += line.rfind("  #", 0) == 0;
    REQUIRE(lines == 5);
}

TEST_CASE("assess exit codes", "[cli][assess]") {
    TempDir dir;
    SECTION("invalid rule base exits 2 with the report") {
        auto doc = io::parse_document(cli::read_file(kTable1));
        doc.rule_base.rules[0].beliefs = {0.6, 0.6, 0.0};
        write(dir.file("bad.kb"), io::dump_document(doc));
        auto r = run({"assess", "--kb", dir.file("bad.kb"), "--in", "pH=1"});
        REQUIRE(r.code == 2);
        REQUIRE(r.err.find("belief sum 1.2 > 1") != std::string::npos);
    }
    SECTION("no activated rule exits 3") {
        auto doc = io::parse_document(cli::read_file(kTable1));
        for (auto& rule : doc.rule_base.rules)
            if (rule.antecedents[0] == 0) rule.theta = 0.0;
        write(dir.file("zero.kb"), io::dump_document(doc));
        auto r = run({"assess", "--kb", dir.file("zero.kb"), "--in", "LandType=1"});
        REQUIRE(r.code == 3);
        REQUIRE(r.err.find("NoRuleActivated") != std::string::npos);
    }
    SECTION("unknown attribute and malformed binding exit 2") {
        REQUIRE(run({"assess", "--kb", kTable1, "--in", "Altitude=1"}).code == 2);
        REQUIRE(run({"assess", "--kb", kTable1, "--in", "pH"}).code == 2);
        REQUIRE(run({"assess", "--kb", kTable1, "--in", "pH=abc"}).code == 2);
        REQUIRE(run({"assess", "--kb", dir.file("missing.kb"), "--in", "pH=1"}).code == 2);
    }
    SECTION("bad usage exits 2") {
        REQUIRE(run({}).code == 2);
        REQUIRE(run({"assess", "--format", "xml"}).code == 2);
    }
}

TEST_CASE("structured output is byte-identical across runs", "[cli][assess]") {
    auto args = all_inputs("0.63");
    args.push_back("--format");
    args.push_back("structured");
    REQUIRE(run(args).out == run(args).out);
}

TEST_CASE("batch scores each row and isolates bad rows", "[cli][batch]") {
    TempDir dir;
    std::string text = "id,LandType,WaterRemoval,Drainage,SoilTexture,pH,EXPERT\n";
    for (int i = 0; i < 12; ++i) {
        const double v = i / 11.0;
        text += std::to_string(i + 1) + "," + std::to_string(v) + ",0.5,0.5," + std::to_string(1 - v) + ",0.25,50\n";
    }
    write(dir.file("cases.csv"), text);
    auto r = run({"batch", "--kb", kTable1, dir.file("cases.csv"), "--out", dir.file("scored.csv")});
    REQUIRE(r.code == 0);
    const auto table = csv::parse(cli::read_file(dir.file("scored.csv")));
    REQUIRE(table.rows.size() == 12);
    REQUIRE(table.header.back() == "error");
    const auto score_col = *table.column("score");
    for (const auto& row : table.rows) {
        REQUIRE(row.size() == table.header.size());
        REQUIRE(csv::parse_number(row[score_col]).has_value());
        REQUIRE(row.back().empty());
        REQUIRE(row[6] == "50"); // passthrough column kept
    }
    REQUIRE(table.rows[0][0] == "1");
    REQUIRE(table.rows[11][0] == "12");
}

TEST_CASE("batch flags rows with unknown attributes", "[cli][batch]") {
    TempDir dir;
    write(dir.file("cases.csv"),
          "id,inputs\n"
          "a,LandType=1;WaterRemoval=1;Drainage=1;SoilTexture=1;pH=1\n"
          "b,LandType=1;Altitude=3\n"
          "c,pH=0\n");
    auto r = run({"batch", "--kb", kTable1, dir.file("cases.csv")});
    REQUIRE(r.code == 0);
    const auto table = csv::parse(r.out);
    REQUIRE(table.rows.size() == 3);
    const auto score = *table.column("score");
    const auto error = *table.column("error");
    REQUIRE(table.rows[0][score] == "100");
    REQUIRE(table.rows[1][score].empty());
    REQUIRE(table.rows[1][error].find("Altitude") != std::string::npos);
    REQUIRE(csv::parse_number(table.rows[2][score]).has_value());
}

TEST_CASE("batch rejects empty or unusable case files", "[cli][batch]") {
    TempDir dir;
    write(dir.file("empty.csv"), "");
    REQUIRE(run({"batch", "--kb", kTable1, dir.file("empty.csv")}).code == 2);
    write(dir.file("header.csv"), "id,LandType\n");
    REQUIRE(run({"batch", "--kb", kTable1, dir.file("header.csv")}).code == 2);
    write(dir.file("foreign.csv"), "id,Altitude\n1,3\n");
    REQUIRE(run({"batch", "--kb", kTable1, dir.file("foreign.csv")}).code == 2);
    write(dir.file("allbad.csv"), "id,LandType\n1,abc\n");
    REQUIRE(run({"batch", "--kb", kTable1, dir.file("allbad.csv")}).code == 2);
}

TEST_CASE("eval reports AUCs for the published rows", "[cli][eval]") {
    auto r = run({"eval", kData + "/table2-visible.csv", "--cols", "BRBES,EXPERT,RBFL", "--format", "structured"});
    REQUIRE(r.code == 0);
    const auto j = io::Json::parse(r.out);
    REQUIRE(j["columns"][0]["name"] == "BRBES");
    REQUIRE(j["columns"][0]["auc"] == 1.0);
    REQUIRE(j["ranking"].size() == 3);

    auto human = run({"eval", kData + "/table2-visible.csv", "--cols", "BRBES"});
    REQUIRE(human.code == 0);
    REQUIRE(human.out.find("BRBES       1.00") != std::string::npos);

    REQUIRE(run({"eval", kData + "/table2-visible.csv", "--cols", "FRBES"}).code == 2);

    TempDir dir;
    write(dir.file("oneclass.csv"), "id,A,benchmark\n1,3,1\n2,4,1\n");
    REQUIRE(run({"eval", dir.file("oneclass.csv")}).code == 3);
}

TEST_CASE("kb init, validate and store management", "[cli][kb]") {
    TempDir dir;
    auto init = run({"kb", "init", "--template", "table1", "--out", dir.file("x.kb")});
    REQUIRE(init.code == 0);
    const auto doc = io::parse_document(cli::read_file(dir.file("x.kb")));
    REQUIRE(doc.rule_base.rules.size() == 243);
    REQUIRE(run({"kb", "validate", dir.file("x.kb")}).code == 0);

    REQUIRE(run({"kb", "init", "--template", "crime-factors", "--out", dir.file("c.kb")}).code == 0);
    REQUIRE(io::parse_document(cli::read_file(dir.file("c.kb"))).rule_base.attributes[0].name == "OutsideVisitorRate");

    auto bad = doc;
    bad.rule_base.rules[4].theta = 3.0;
    write(dir.file("bad.kb"), io::dump_document(bad));
    auto v = run({"kb", "validate", dir.file("bad.kb"), "--format", "structured"});
    REQUIRE(v.code == 2);
    REQUIRE(io::Json::parse(v.out)["errors"] == 1);

    const auto store = dir.file("store");
    ::setenv("BRB_KB_STORE", store.c_str(), 1);
    REQUIRE(run({"kb", "save", "--kb", dir.file("x.kb")}).code == 0);
    REQUIRE(run({"kb", "save", "--kb", dir.file("bad.kb")}).code == 2);
    REQUIRE(run({"kb", "save", "--kb", dir.file("c.kb")}).code == 0);
    auto versions = run({"kb", "versions", "--format", "structured"});
    REQUIRE(versions.code == 0);
    const auto vj = io::Json::parse(versions.out)["versions"];
    REQUIRE(vj.size() == 2);
    REQUIRE(vj[0]["name"] == "behavioral-impact");
    REQUIRE(vj[1]["name"] == "crime-factors");

    // assess without --kb uses the latest stored rule base
    auto r = run({"assess", "--in", "Traffic=1", "--format", "structured"});
    REQUIRE(r.code == 0);
    ::unsetenv("BRB_KB_STORE");
    REQUIRE(run({"kb", "versions"}).code == 2);
}

TEST_CASE("the installed binary follows the exit-code contract", "[cli][process]") {
    const std::string bin = BRB_CLI_PATH;
    REQUIRE(shell(bin + " assess --kb " + kTable1 + " --in LandType=1 --in pH=1 > /dev/null") == 0);
    REQUIRE(shell(bin + " assess --kb " + kTable1 + " --in Nope=1 2> /dev/null") == 2);
    REQUIRE(shell(bin + " eval " + kData + "/table2-visible.csv --cols BRBES > /dev/null") == 0);
    REQUIRE(shell(bin + " kb validate " + kData + "/crime-factors.kb > /dev/null") == 0);
    REQUIRE(shell(bin + " --help > /dev/null") == 0);
}
