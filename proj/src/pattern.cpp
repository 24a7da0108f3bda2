#include "vsl/pattern.hpp"

#include <algorithm>

#include "vsl/errors.hpp"

namespace vsl {

std::string to_string(JointKind k) {
  switch (k) {
    case JointKind::BendUnilateral: return "bend_unilateral";
    case JointKind::HingeBilateral: return "hinge_bilateral";
    case JointKind::Twist: return "twist";
    case JointKind::Shear: return "shear";
    case JointKind::AxialCompress: return "axial_compress";
  }
  return "hinge_bilateral";
}

std::string to_string(JointSize s) { return s == JointSize::Small ? "small" : "large"; }

JointKind joint_kind_from_string(const std::string& s) {
  for (auto k : {JointKind::BendUnilateral, JointKind::HingeBilateral, JointKind::Twist,
                 JointKind::Shear, JointKind::AxialCompress}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown joint kind '" + s + "'");
}

JointSize joint_size_from_string(const std::string& s) {
  if (s == "small") return JointSize::Small;
  if (s == "large") return JointSize::Large;
  throw ValidationError("unknown joint size '" + s + "'");
}

ActivationPattern::ActivationPattern(std::vector<Address> addrs, std::string lbl)
    : addresses(std::move(addrs)), label(std::move(lbl)) {
  normalize();
}

bool ActivationPattern::contains(const Address& a) const {
  return std::binary_search(addresses.begin(), addresses.end(), a);
}

void ActivationPattern::normalize() {
  std::sort(addresses.begin(), addresses.end());
  addresses.erase(std::unique(addresses.begin(), addresses.end()), addresses.end());
}

}  // namespace vsl
