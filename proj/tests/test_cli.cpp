#include <gtest/gtest.h>

#include <bose_expand/cli.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace bose_expand;
namespace fs = std::filesystem;

namespace {

const char* benchmark_config = R"({"spec": 1, "dimension": 1, "cutoff": 1, "N": 10,
                                   "potential": {"kind": "constant", "value": 1.0}})";

class Scratch : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("bose_expand_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string write(const std::string& name, const std::string& text) const {
        const fs::path p = dir_ / name;
        std::ofstream(p) << text;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    static std::string read(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }
    static int invoke(const std::string& args) {
        const std::string cmd = std::string(BOSE_EXPAND_CLI_PATH) + " " + args + " >/dev/null 2>&1";
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    }

    fs::path dir_;
};

RunConfig config_for(const std::string& task, const std::string& text = benchmark_config) {
    RunConfig c;
    c.task = task;
    c.model = parse_model_config(parse_json_text(text, "test"));
    return c;
}

} // namespace

TEST(Config, ParsesAndRoundTrips) {
    const ModelConfig c = parse_model_config(parse_json_text(benchmark_config, "test"));
    EXPECT_EQ(c.particles, 10);
    EXPECT_EQ(c.cutoff, 1);
    const ModelConfig again = parse_model_config(model_config_to_json(c));
    EXPECT_EQ(model_config_to_json(again).dump(), model_config_to_json(c).dump());
    const ModelConfig table = parse_model_config(parse_json_text(
        R"({"spec":1,"dimension":1,"cutoff":2,"N":6,"potential":{"kind":"table","entries":[{"k":[0],"value":1.0},{"k":[1],"value":0.5},{"k":[-1],"value":0.5}]}})",
        "test"));
    EXPECT_DOUBLE_EQ(table.model().vhat({1, 0, 0}), 0.5);
}

TEST(Config, RejectsSchemaViolations) {
    EXPECT_THROW(parse_json_text("{\"spec\": 1,", "test"), ConfigError);
    const std::vector<std::string> bad = {
        R"({"spec":1,"dimension":1,"cutoff":1,"N":10,"potential":{"kind":"constant","value":1},"extra":0})",
        R"({"spec":2,"dimension":1,"cutoff":1,"N":10,"potential":{"kind":"constant","value":1}})",
        R"({"spec":1,"dimension":4,"cutoff":1,"N":10,"potential":{"kind":"constant","value":1}})",
        R"({"spec":1,"dimension":1,"cutoff":1,"N":1,"potential":{"kind":"constant","value":1}})",
        R"({"spec":1,"dimension":1,"cutoff":1,"N":10,"potential":{"kind":"constant","value":1,"width":2}})",
        R"({"spec":1,"dimension":1,"cutoff":1,"N":10,"potential":{"kind":"yukawa"}})",
        R"({"spec":1,"dimension":1,"cutoff":1,"N":"ten","potential":{"kind":"constant","value":1}})",
        R"({"spec":1,"dimension":1,"cutoff":1,"N":10})",
        R"({"spec":1,"dimension":1,"cutoff":1,"N":10,"potential":{"kind":"constant","value":1},"trap":{"L":6}})",
    };
    for (const auto& text : bad) EXPECT_THROW(parse_model_config(parse_json_text(text, "test")), ConfigError) << text;
}

TEST(Tasks, CsvHeadersAreFixed) {
    EXPECT_EQ(CsvWriter("expand-energy").str(), "order,value\n");
    EXPECT_EQ(CsvWriter("bogoliubov").str(), "mode,momentum,A,B,epsilon,u,v,c\n");
    EXPECT_EQ(CsvWriter("dynamics").str(), "N,error_order0,error_order1\n");
    EXPECT_EQ(CsvWriter("validate").str(), "id,measured,expected,band,pass,diagnostic\n");
}

TEST(Tasks, ExpandEnergyReportsTheBenchmarkCoefficients) {
    const Report r = run(config_for("expand-energy"));
    EXPECT_NEAR(r.body["e_H"].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(r.body["E0"].get<double>(), -0.0123541, 5e-7);
    EXPECT_NEAR(r.body["E1"].get<double>(), -0.0124937, 5e-7);
    EXPECT_EQ(r.status, exit_ok);
    EXPECT_EQ(r.csv.substr(0, 12), "order,value\n");
}

TEST(Tasks, ReportsAreDeterministic) {
    RunConfig c = config_for("bogoliubov");
    EXPECT_EQ(run(c).body.dump(), run(c).body.dump());
    c.task = "solve-hartree";
    EXPECT_EQ(run(c).csv, run(c).csv);
}

TEST(Tasks, UnknownTaskAndBadParametersAreUsageErrors) {
    EXPECT_THROW(run(config_for("frobnicate")), ConfigError);
    RunConfig c = config_for("expand-energy");
    c.parameters["orders"] = 3;
    EXPECT_THROW(run(c), ConfigError);
    c = config_for("edgeworth");
    c.parameters["observable"] = "density";
    EXPECT_THROW(run(c), ConfigError);
    c = config_for("dynamics");
    c.parameters["quench"] = json{{"vhat_after", 2.0}, {"scale", 2.0}};
    EXPECT_THROW(run(c), ConfigError);
}

TEST_F(Scratch, BinaryWritesJsonAndCsv) {
    const std::string cfg = write("model.json", benchmark_config);
    EXPECT_EQ(invoke("expand-energy --config " + cfg + " --out " + path("e.json")), 0);
    const json body = json::parse(read(path("e.json")));
    EXPECT_NEAR(body["E0"].get<double>(), -0.0123541, 5e-7);
    EXPECT_EQ(read(path("e.csv")).substr(0, 12), "order,value\n");
    EXPECT_FALSE(fs::exists(path("e.json.tmp")));
}

TEST_F(Scratch, BinaryExitCodes) {
    const std::string cfg = write("model.json", benchmark_config);
    const std::string broken = write("broken.json", "{\"spec\": 1, \"dimension\":");
    const std::string unknown = write("unknown.json", R"({"spec":1,"dimension":1,"cutoff":1,"N":10,"potential":{"kind":"constant","value":1},"colour":3})");
    EXPECT_EQ(invoke("expand-energy --config " + broken + " --out " + path("a.json")), 64);
    EXPECT_EQ(invoke("expand-energy --config " + unknown + " --out " + path("b.json")), 64);
    EXPECT_EQ(invoke("expand-energy --out " + path("c.json")), 64);
    EXPECT_EQ(invoke("no-such-task"), 64);
    EXPECT_EQ(invoke("dynamics --config " + cfg + " --quench '{\"bogus\": 1}' --out " + path("d.json")), 64);
    for (const char* f : {"a", "b", "c", "d"}) {
        EXPECT_FALSE(fs::exists(path(std::string(f) + ".json")));
        EXPECT_FALSE(fs::exists(path(std::string(f) + ".csv")));
    }
}
