// Builds the behavioural-impact rule base in memory and walks one assessment
// through each pipeline stage.

#include "brb/brb.hpp"

#include <cstdio>

int main() {
    const auto doc = brb::templates::behavioral_impact();
    const auto& rb = doc.rule_base;

    const brb::InputMap inputs = {
        {"LandType", 0.9}, {"WaterRemoval", 0.75}, {"Drainage", 0.3}, {"SoilTexture", 0.5}, {"pH", 0.1},
    };

    const auto ti = brb::transform_all(rb, inputs);
    for (std::size_t i = 0; i < rb.attributes.size(); ++i) {
        std::printf("%-13s", rb.attributes[i].name.c_str());
        for (std::size_t j = 0; j < ti.attributes[i].matching.size(); ++j)
            std::printf("  %s=%.2f", rb.attributes[i].grades[j].label.c_str(), ti.attributes[i].matching[j]);
        std::printf("\n");
    }

    const auto result = brb::assess(rb, inputs);
    std::printf("\nscore %.4f  residual %.4f\n", result.score, result.residual);
    for (std::size_t j = 0; j < result.beliefs.size(); ++j)
        std::printf("  %-5s %.4f\n", rb.consequent.grades[j].label.c_str(), result.beliefs[j]);
    return 0;
}
