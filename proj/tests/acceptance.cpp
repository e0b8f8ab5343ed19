// Runs every acceptance criterion once, prints one line per criterion, then checks
// the runtime limits and byte-reproducibility of a second full run.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <vector>

#include <bose_expand/validation.hpp>

using namespace bose_expand;

namespace {

struct Limit {
    const char* label;
    double seconds;
};

void line(bool pass, const std::string& id, const std::string& text) {
    std::printf("%s %-8s %s\n", pass ? "PASS" : "FAIL", id.c_str(), text.c_str());
}

} // namespace

int main() {
    ValidationOptions opt;
    opt.workers = default_workers();
    std::vector<std::pair<int, double>> timings;
    opt.on_group = [&](int g, double secs) {
        timings.emplace_back(g, secs);
        std::fprintf(stderr, "group %d finished in %.1f s\n", g, secs);
    };

    const auto start = std::chrono::steady_clock::now();
    const ValidationSummary first = run_validation(opt);
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool ok = true;
    for (const auto& c : first.criteria) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: measured %.6g, %s %.6g%s", c.description.c_str(), c.measured,
                      c.relation == "slope" ? "expected" : (c.relation == "max" ? "limit" : "bound"), c.expected,
                      c.relation == "slope" ? (" +- " + std::to_string(c.band)).c_str() : "");
        if (c.diagnostic) {
            std::printf("INFO %-8s %s%s\n", c.id.c_str(), buf, c.note.empty() ? "" : (" [" + c.note + "]").c_str());
            continue;
        }
        line(c.pass, c.id, buf);
        ok = ok && c.pass;
    }

    // group 1 reports twice: K=1 then K=2
    const std::vector<Limit> limits = {{"1", 30}, {"1.K2", 180}, {"2", 60}, {"3", 60}, {"4", 120},
                                       {"5", 60}, {"6", 180}, {"7", 60}};
    for (std::size_t i = 0; i < timings.size() && i < limits.size(); ++i) {
        const bool pass = timings[i].second < limits[i].seconds;
        line(pass, std::string("time.") + limits[i].label,
             "runtime " + std::to_string(timings[i].second) + " s < " + std::to_string(limits[i].seconds) + " s");
        ok = ok && pass;
    }
    line(total < 600.0, "8e.time", "full suite in " + std::to_string(total) + " s < 600 s");
    ok = ok && total < 600.0;

    ValidationOptions again = opt;
    again.on_group = nullptr;
    const bool same = run_validation(again).to_json().dump(2) == first.to_json().dump(2);
    line(same, "8e.bytes", "two consecutive full runs produce identical JSON");
    ok = ok && same;

    std::printf("overall: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}
