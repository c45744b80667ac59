use std::fmt;
use std::str::FromStr;

use super::NetError;

/// One layer of the architecture descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    /// Valid-padding convolution over an HWC tensor.
    Conv { filters: usize, kernel: usize, stride: usize, relu: bool },
    Dense { units: usize, relu: bool },
}

impl LayerSpec {
    pub fn relu(&self) -> bool {
        match *self {
            LayerSpec::Conv { relu, .. } | LayerSpec::Dense { relu, .. } => relu,
        }
    }
}

/// Network architecture: input tensor shape `(h, w, c)` plus the layer stack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arch {
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
}

/// A layer with all tensor dimensions resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerShape {
    Conv {
        in_h: usize,
        in_w: usize,
        in_c: usize,
        out_h: usize,
        out_w: usize,
        filters: usize,
        kernel: usize,
        stride: usize,
        relu: bool,
    },
    Dense { inputs: usize, units: usize, relu: bool },
}

impl LayerShape {
    pub fn weight_len(&self) -> usize {
        match *self {
            LayerShape::Conv { in_c, filters, kernel, .. } => filters * kernel * kernel * in_c,
            LayerShape::Dense { inputs, units, .. } => inputs * units,
        }
    }

    pub fn bias_len(&self) -> usize {
        match *self {
            LayerShape::Conv { filters, .. } => filters,
            LayerShape::Dense { units, .. } => units,
        }
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            LayerShape::Conv { in_c, kernel, .. } => kernel * kernel * in_c,
            LayerShape::Dense { inputs, .. } => inputs,
        }
    }

    pub fn output_len(&self) -> usize {
        match *self {
            LayerShape::Conv { out_h, out_w, filters, .. } => out_h * out_w * filters,
            LayerShape::Dense { units, .. } => units,
        }
    }

    pub fn relu(&self) -> bool {
        match *self {
            LayerShape::Conv { relu, .. } | LayerShape::Dense { relu, .. } => relu,
        }
    }
}

impl Arch {
    /// Conv(16, 8×8, /4) → Conv(32, 4×4, /2) → Dense 256 → Dense |A|.
    pub fn dqn(input: [usize; 3], actions: usize) -> Self {
        Self {
            input,
            layers: vec![
                LayerSpec::Conv { filters: 16, kernel: 8, stride: 4, relu: true },
                LayerSpec::Conv { filters: 32, kernel: 4, stride: 2, relu: true },
                LayerSpec::Dense { units: 256, relu: true },
                LayerSpec::Dense { units: actions, relu: false },
            ],
        }
    }

    /// Conv(8, 4×4, /2) → Dense 32 → Dense |A|, sized for 20×20 inputs.
    pub fn small(input: [usize; 3], actions: usize) -> Self {
        Self {
            input,
            layers: vec![
                LayerSpec::Conv { filters: 8, kernel: 4, stride: 2, relu: true },
                LayerSpec::Dense { units: 32, relu: true },
                LayerSpec::Dense { units: actions, relu: false },
            ],
        }
    }

    /// The default architecture for an input: the DQN-style stack when the
    /// image is large enough for its 8×8/4 first layer, the small one otherwise.
    pub fn for_input(input: [usize; 3], actions: usize) -> Self {
        if input[0] >= 36 && input[1] >= 36 {
            Self::dqn(input, actions)
        } else if input[0] >= 4 && input[1] >= 4 {
            Self::small(input, actions)
        } else {
            Self {
                input,
                layers: vec![
                    LayerSpec::Dense { units: 32, relu: true },
                    LayerSpec::Dense { units: actions, relu: false },
                ],
            }
        }
    }

    pub fn resolve(&self) -> Result<Vec<LayerShape>, NetError> {
        let [mut h, mut w, mut c] = self.input;
        if h == 0 || w == 0 || c == 0 {
            return Err(NetError::Shape(format!("empty input shape {:?}", self.input)));
        }
        let mut flat: Option<usize> = None;
        let mut shapes = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            match *layer {
                LayerSpec::Conv { filters, kernel, stride, relu } => {
                    if flat.is_some() {
                        return Err(NetError::Shape(format!("layer {i}: conv after dense")));
                    }
                    if filters == 0 || kernel == 0 || stride == 0 || kernel > h || kernel > w {
                        return Err(NetError::Shape(format!(
                            "layer {i}: conv {filters}x{kernel}/{stride} does not fit {h}x{w}x{c}"
                        )));
                    }
                    let out_h = (h - kernel) / stride + 1;
                    let out_w = (w - kernel) / stride + 1;
                    shapes.push(LayerShape::Conv {
                        in_h: h,
                        in_w: w,
                        in_c: c,
                        out_h,
                        out_w,
                        filters,
                        kernel,
                        stride,
                        relu,
                    });
                    (h, w, c) = (out_h, out_w, filters);
                }
                LayerSpec::Dense { units, relu } => {
                    if units == 0 {
                        return Err(NetError::Shape(format!("layer {i}: dense with zero units")));
                    }
                    let inputs = flat.unwrap_or(h * w * c);
                    shapes.push(LayerShape::Dense { inputs, units, relu });
                    flat = Some(units);
                }
            }
        }
        if shapes.is_empty() {
            return Err(NetError::Shape("architecture has no layers".into()));
        }
        Ok(shapes)
    }

    pub fn input_len(&self) -> usize {
        self.input.iter().product()
    }
}

impl fmt::Display for Arch {
    /// Compact form, e.g. `conv16k8s4,conv32k4s2,dense256,linear5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.layers.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match *l {
                LayerSpec::Conv { filters, kernel, stride, relu } => {
                    write!(f, "{}{filters}k{kernel}s{stride}", if relu { "conv" } else { "convlin" })?
                }
                LayerSpec::Dense { units, relu } => {
                    write!(f, "{}{units}", if relu { "dense" } else { "linear" })?
                }
            }
        }
        Ok(())
    }
}

/// Parse a layer list in the [`Arch`] display format (input shape supplied separately).
pub fn parse_layers(text: &str) -> Result<Vec<LayerSpec>, NetError> {
    text.split(',')
        .map(|tok| tok.trim().parse::<ParsedLayer>().map(|p| p.0))
        .collect()
}

struct ParsedLayer(LayerSpec);

impl FromStr for ParsedLayer {
    type Err = NetError;

    fn from_str(tok: &str) -> Result<Self, Self::Err> {
        let bad = || NetError::Shape(format!("bad layer token `{tok}`"));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let conv = |rest: &str, relu: bool| -> Result<LayerSpec, NetError> {
            let (filters, rest) = rest.split_once('k').ok_or_else(bad)?;
            let (kernel, stride) = rest.split_once('s').ok_or_else(bad)?;
            Ok(LayerSpec::Conv { filters: num(filters)?, kernel: num(kernel)?, stride: num(stride)?, relu })
        };
        let spec = if let Some(rest) = tok.strip_prefix("convlin") {
            conv(rest, false)?
        } else if let Some(rest) = tok.strip_prefix("conv") {
            conv(rest, true)?
        } else if let Some(rest) = tok.strip_prefix("dense") {
            LayerSpec::Dense { units: num(rest)?, relu: true }
        } else if let Some(rest) = tok.strip_prefix("linear") {
            LayerSpec::Dense { units: num(rest)?, relu: false }
        } else {
            return Err(bad());
        };
        Ok(ParsedLayer(spec))
    }
}
