/// Double-well potential in phase variables, `F(s) = s^2 (1 - s)^2`.
pub fn phase_well(s: f64) -> f64 {
    let q = 1.0 - s;
    s * s * q * q
}

/// Double well in displacement variables,
/// `W(s) = (4 beta / b^2) s^2 (b/2 - s)^2`, with wells at `0` and `b/2`.
///
/// `W(u) = (b^2 / 4) beta F(2u / b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    beta: f64,
    b: f64,
}

impl Potential {
    pub fn new(beta: f64, b: f64) -> Self {
        Self { beta, b }
    }

    pub fn coefficient(&self) -> f64 {
        4.0 * self.beta / (self.b * self.b)
    }

    pub fn value(&self, s: f64) -> f64 {
        let q = 0.5 * self.b - s;
        self.coefficient() * s * s * q * q
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let q = 0.5 * self.b - s;
        self.coefficient() * (2.0 * s * q * q - 2.0 * s * s * q)
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        let q = 0.5 * self.b - s;
        self.coefficient() * (2.0 * q * q - 8.0 * s * q + 2.0 * s * s)
    }
}

pub fn potential_w(s: f64, p: &Potential) -> f64 {
    p.value(s)
}

pub fn potential_dw(s: f64, p: &Potential) -> f64 {
    p.derivative(s)
}
