// Generates the bundled synthetic evaluation dataset: integer count triples
// labeled by a nonlinear decision rule with label noise. The rule combines an
// AND region with an XOR arm, which additive models cannot represent, so tree
// ensembles separate the classes while logistic regression and naive Bayes
// lag behind.
//
//   rule(c, d, i) = (c >= 5 AND d >= 3) XOR (i >= 4)
//
// Noise: with probability 0.10 a sample's label is replaced by a fair coin
// flip, so roughly 5% of labels are flipped in expectation.

#include "pkgtriage/labeling.hpp"
#include "pkgtriage/rng.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

std::vector<pkgtriage::LabeledSample> generate(std::size_t n, std::uint64_t seed) {
    using namespace pkgtriage;
    Rng rng(seed);
    std::vector<LabeledSample> samples;
    samples.reserve(n);
    for (std::size_t row = 0; row < n; ++row) {
        LabeledSample s;
        s.id.ecosystem = Ecosystem::npm;
        char name[32];
        std::snprintf(name, sizeof name, "synthetic-%04zu", row);
        s.id.name = name;
        s.id.version = "1.0.0";
        s.n_commands = static_cast<long>(rng.below(13)); // 0..12
        s.n_domains = static_cast<long>(rng.below(10));  // 0..9
        s.n_ips = static_cast<long>(rng.below(8));       // 0..7

        bool and_arm = s.n_commands >= 5 && s.n_domains >= 3;
        bool ip_arm = s.n_ips >= 4;
        bool malicious = and_arm != ip_arm;
        if (rng.unit() < 0.10) malicious = rng.unit() < 0.5;

        s.label = malicious ? Label::malicious : Label::benign;
        if (malicious) s.reasons = {"synthetic"};
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic labeled-count dataset generator"};
    std::string out_path;
    std::size_t n = 2000;
    std::uint64_t seed = 20240817;
    app.add_option("--out", out_path, "output labeled CSV path")->required();
    app.add_option("--n", n, "number of samples");
    app.add_option("--seed", seed, "generator seed");
    CLI11_PARSE(app, argc, argv);

    auto samples = generate(n, seed);
    long malicious = 0;
    for (const auto& s : samples)
        if (s.label == pkgtriage::Label::malicious) ++malicious;

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }
    out << pkgtriage::labeled_to_csv(samples, "standard");
    std::cout << samples.size() << " samples (" << malicious << " malicious, "
              << (static_cast<long>(samples.size()) - malicious) << " benign) -> "
              << out_path << "\n";
    return 0;
}
