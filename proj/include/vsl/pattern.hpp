#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsl/geometry.hpp"

namespace vsl {

enum class JointKind { BendUnilateral, HingeBilateral, Twist, Shear, AxialCompress };
enum class JointSize { Small, Large };

std::string to_string(JointKind k);
std::string to_string(JointSize s);
JointKind joint_kind_from_string(const std::string& s);
JointSize joint_size_from_string(const std::string& s);

struct JointSpec {
  JointKind kind = JointKind::HingeBilateral;
  Address location;
  int band_width = 1;
  JointSize magnitude = JointSize::Small;
  int rows_activated = 0;  // axial_compress only
  int stagger = 1;         // twist/shear columns per row
};

/// A set of voxels commanded to melt. Addresses are kept sorted and unique.
struct ActivationPattern {
  std::vector<Address> addresses;
  std::optional<JointSpec> joint;
  std::string label;

  ActivationPattern() = default;
  ActivationPattern(std::vector<Address> addrs, std::string lbl = {});

  bool contains(const Address& a) const;
  bool empty() const { return addresses.empty(); }
  std::size_t size() const { return addresses.size(); }
  void normalize();
};

}  // namespace vsl
