#include "mmcf/classes.hpp"

#include <stdexcept>
#include <string>

namespace mmcf {

namespace {
constexpr std::array<std::string_view, kClassCount> kNames = {
    "BottleEmpty", "BottleHalf", "BottleFull", "SpamEmpty", "SpamFull", "CanEmpty", "CanFull",
};
}

ContainerClass class_from_index(std::size_t index) {
    if (index >= kClassCount) throw std::out_of_range("class index " + std::to_string(index));
    return static_cast<ContainerClass>(index);
}

std::string_view to_string(ContainerClass c) { return kNames.at(index_of(c)); }

std::string_view to_string(GraspType g) { return g == GraspType::Top ? "Top" : "Side"; }

std::string_view to_string(Container c) {
    switch (c) {
        case Container::Bottle: return "Bottle";
        case Container::Spam: return "Spam";
        case Container::Can: return "Can";
    }
    return "?";
}

ContainerClass class_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kClassCount; ++i) {
        if (kNames[i] == name) return static_cast<ContainerClass>(i);
    }
    throw std::invalid_argument("unknown class '" + std::string(name) + "'");
}

GraspType grasp_from_string(std::string_view name) {
    if (name == "Top") return GraspType::Top;
    if (name == "Side") return GraspType::Side;
    throw std::invalid_argument("unknown grasp '" + std::string(name) + "'");
}

Container container_of(ContainerClass c) {
    switch (c) {
        case ContainerClass::BottleEmpty:
        case ContainerClass::BottleHalf:
        case ContainerClass::BottleFull: return Container::Bottle;
        case ContainerClass::SpamEmpty:
        case ContainerClass::SpamFull: return Container::Spam;
        case ContainerClass::CanEmpty:
        case ContainerClass::CanFull: return Container::Can;
    }
    throw std::logic_error("bad class");
}

GraspType grasp_for(ContainerClass c) {
    return container_of(c) == Container::Spam ? GraspType::Top : GraspType::Side;
}

double fill_fraction(ContainerClass c) {
    switch (c) {
        case ContainerClass::BottleHalf: return 0.5;
        case ContainerClass::BottleFull:
        case ContainerClass::SpamFull:
        case ContainerClass::CanFull: return 1.0;
        default: return 0.0;
    }
}

double mass_grams(ContainerClass c) {
    switch (c) {
        case ContainerClass::BottleEmpty: return 20;
        case ContainerClass::BottleHalf: return 270;
        case ContainerClass::BottleFull: return 520;
        case ContainerClass::SpamEmpty: return 80;
        case ContainerClass::SpamFull: return 352;
        case ContainerClass::CanEmpty: return 50;
        case ContainerClass::CanFull: return 348;
    }
    throw std::logic_error("bad class");
}

}  // namespace mmcf
