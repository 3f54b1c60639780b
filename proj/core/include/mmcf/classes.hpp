#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace mmcf {

/// The seven container/content classes. The numeric order is fixed and used
/// as the index into every score array and confusion matrix.
enum class ContainerClass : std::uint8_t {
    BottleEmpty = 0,
    BottleHalf,
    BottleFull,
    SpamEmpty,
    SpamFull,
    CanEmpty,
    CanFull,
};

inline constexpr std::size_t kClassCount = 7;

inline constexpr std::array<ContainerClass, kClassCount> kAllClasses = {
    ContainerClass::BottleEmpty, ContainerClass::BottleHalf, ContainerClass::BottleFull,
    ContainerClass::SpamEmpty,   ContainerClass::SpamFull,   ContainerClass::CanEmpty,
    ContainerClass::CanFull,
};

enum class Container : std::uint8_t { Bottle, Spam, Can };
enum class GraspType : std::uint8_t { Side, Top };

constexpr std::size_t index_of(ContainerClass c) { return static_cast<std::size_t>(c); }
ContainerClass class_from_index(std::size_t index);

std::string_view to_string(ContainerClass c);
std::string_view to_string(GraspType g);
std::string_view to_string(Container c);
ContainerClass class_from_string(std::string_view name);
GraspType grasp_from_string(std::string_view name);

Container container_of(ContainerClass c);
/// Top grasp for the spam box, side grasp for bottle and can.
GraspType grasp_for(ContainerClass c);
/// 0, 0.5 or 1.
double fill_fraction(ContainerClass c);
/// Total mass of container plus content in grams.
double mass_grams(ContainerClass c);

}  // namespace mmcf
