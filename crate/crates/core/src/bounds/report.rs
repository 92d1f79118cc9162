use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// What a report bounds. Only `PoincareConstant` rows enter the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    PoincareConstant,
    /// Poincare constant of the Gaussian restricted to a shell around the obstacle.
    ShellPoincare,
    /// Admissible exponential rate for a hitting time.
    ExitRate,
    CheegerConstant,
    /// Non-binding conjectured order of magnitude.
    Conjecture,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeConstant {
    pub name: String,
    pub value: f64,
}

fn finite_or_marker<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// One evaluated bound. `value = coefficient * free_constant` when the bound carries
/// an unspecified universal constant (exposed with a default of 1).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub anchor: String,
    pub side: Side,
    pub quantity: Quantity,
    #[serde(serialize_with = "finite_or_marker")]
    pub value: f64,
    #[serde(serialize_with = "finite_or_marker")]
    pub coefficient: f64,
    pub free_constant: Option<FreeConstant>,
    pub applicable: bool,
    pub explicit: bool,
    /// Participates in the best-explicit envelope.
    pub certified: bool,
    pub condition: String,
}

impl BoundReport {
    pub fn explicit(anchor: &str, side: Side, value: f64, applicable: bool, condition: impl Into<String>) -> Self {
        BoundReport {
            anchor: anchor.to_string(),
            side,
            quantity: Quantity::PoincareConstant,
            value,
            coefficient: value,
            free_constant: None,
            applicable,
            explicit: true,
            certified: true,
            condition: condition.into(),
        }
    }

    pub fn symbolic(
        anchor: &str,
        side: Side,
        coefficient: f64,
        constant: (&str, f64),
        applicable: bool,
        condition: impl Into<String>,
    ) -> Self {
        BoundReport {
            anchor: anchor.to_string(),
            side,
            quantity: Quantity::PoincareConstant,
            value: coefficient * constant.1,
            coefficient,
            free_constant: Some(FreeConstant {
                name: constant.0.to_string(),
                value: constant.1,
            }),
            applicable,
            explicit: false,
            certified: false,
            condition: condition.into(),
        }
    }

    /// A bound whose hypotheses fail for the given parameters.
    pub fn not_applicable(anchor: &str, side: Side, condition: impl Into<String>) -> Self {
        let mut r = BoundReport::explicit(anchor, side, f64::NAN, false, condition);
        r.certified = false;
        r
    }

    pub fn quantity(mut self, q: Quantity) -> Self {
        self.quantity = q;
        self
    }

    pub fn uncertified(mut self) -> Self {
        self.certified = false;
        self
    }

    /// Usable in a sandwich assertion.
    pub fn in_envelope(&self) -> bool {
        self.applicable && self.explicit && self.certified && self.quantity == Quantity::PoincareConstant
    }

    /// Same bound for the problem at stiffness `lambda`, given the report at stiffness 1
    /// of the rescaled problem.
    pub fn rescaled_from_unit(mut self, lambda: f64) -> Self {
        let factor = match self.quantity {
            Quantity::ExitRate => lambda,
            Quantity::CheegerConstant => 1.0 / lambda.sqrt(),
            _ => 1.0 / lambda,
        };
        self.value *= factor;
        self.coefficient *= factor;
        self
    }
}
