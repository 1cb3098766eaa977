#!/usr/bin/env python3
"""Regenerate core/src/orb_pattern.cpp from an OpenCV-style orb.cpp.

Usage: gen_orb_pattern.py path/to/orb.cpp > core/src/orb_pattern.cpp

The table is the learned 256-pair pattern (`bit_pattern_31_`) shipped with
OpenCV's ORB. Comments in the source table are stripped.
"""
import re
import sys

src = open(sys.argv[1], encoding="utf-8", errors="replace").read()
start = src.index("bit_pattern_31_[256*4]")
body = src[src.index("{", start) + 1 : src.index("};", start)]
body = re.sub(r"/\*.*?\*/", "", body, flags=re.S)
nums = [int(x) for x in re.findall(r"-?\d+", body)]
if len(nums) != 1024:
    sys.exit(f"expected 1024 values, found {len(nums)}")

print('#include "simhaystack/keypoints.hpp"\n')
print("namespace simhaystack {\n")
print("// Learned 256-pair BRIEF sampling pattern of ORB (31x31 patch), one test per")
print("// row: (x1, y1, x2, y2) relative to the keypoint. Values are the table")
print("// distributed with OpenCV's ORB implementation.")
print("const std::array<std::int8_t, 256 * 4> kOrbPattern = {")
for r in range(256):
    print("    %d, %d, %d, %d," % tuple(nums[4 * r : 4 * r + 4]))
print("};\n")
print("}  // namespace simhaystack")
