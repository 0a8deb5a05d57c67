#pragma once

#include <array>

// Final MCC per architecture/dataset/d_z configuration, in table order:
// MLP, ConvNet (MNIST, CIFAR 10, SVHN) then ResNet (CIFAR 10, SVHN), each at
// d_z = 50, 90, 200.
namespace latentid::testdata {

inline constexpr std::array<double, 24> kIvaeMcc{
    0.6270, 0.6000, 0.5830, 0.7131, 0.5584, 0.3618,
    0.7065, 0.5752, 0.4009, 0.6754, 0.7075, 0.8390,
    0.7301, 0.5736, 0.4351, 0.6731, 0.5634, 0.4467,
    0.8297, 0.7158, 0.5455, 0.7443, 0.6354, 0.5090};

inline constexpr std::array<double, 24> kVadeMcc{
    0.6360, 0.5828, 0.4899, 0.7128, 0.5703, 0.5192,
    0.7389, 0.6221, 0.5489, 0.6281, 0.6722, 0.7208,
    0.7165, 0.5469, 0.4656, 0.6604, 0.5425, 0.4384,
    0.8116, 0.7014, 0.5775, 0.7284, 0.6129, 0.4922};

inline constexpr std::array<double, 24> kVaeMcc{
    0.6179, 0.5676, 0.5614, 0.6904, 0.5851, 0.5047,
    0.7034, 0.5737, 0.4838, 0.6098, 0.5326, 0.5958,
    0.7005, 0.5581, 0.4196, 0.6546, 0.5479, 0.4720,
    0.8273, 0.6956, 0.5127, 0.7431, 0.6237, 0.4866};

inline constexpr double kIvaeVadeP = 0.422;
inline constexpr double kIvaeVaeP = 0.029;
inline constexpr double kVaeVadeP = 0.039;

}  // namespace latentid::testdata
