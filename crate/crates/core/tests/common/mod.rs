use cmap_core::prepotential::{CubicModel, Model, QuadraticModel};
use cmap_core::special_kahler::SampleBox;

pub fn models() -> Vec<(&'static str, Model, SampleBox)> {
    vec![
        (
            "quadratic n=0",
            QuadraticModel::standard(0).into(),
            SampleBox::quadratic(),
        ),
        (
            "quadratic n=1",
            QuadraticModel::standard(1).into(),
            SampleBox::quadratic(),
        ),
        ("cubic STU", CubicModel::stu().into(), SampleBox::cubic()),
    ]
}
