//! Recorded output of a reference run over 1000 clinical-informatics papers:
//! the repository URLs it found and the classification lines it printed.
//! Used as the calibration oracle for the default tier rule and the report
//! line format.

use crate::maturity::MaturityTier;

/// Cleaned URLs in first-seen order.
pub const REFERENCE_URLS: [&str; 31] = [
    "https://github.com/AtlasAnalyticsLab/CPath_Survey",
    "https://github.com/Andoree/smm4h_2021_classification",
    "https://github.com/luoyuanlab/Clinical-Longformer",
    "https://github.com/RyanWangZf/PyTrial",
    "https://github.com/RyanWangZf/Trial2Vec",
    "https://github.com/sigven/oncoEnrichR",
    "https://github.com/ShixiangWang/ezcox",
    "https://github.com/nadeemLab/CIR",
    "https://github.com/ncbi-nlp/BioSentVec",
    "https://github.com/HLTCHKUST/long-biomedical-model",
    "https://github.com/tanlab/ConvolutionMedicalNer",
    "https://github.com/johntiger1/multimodal_fairness",
    "https://github.com/li-xirong/mmc-amd",
    "https://github.com/ritaranx/ClinGen",
    "https://github.com/caoyunkang/CDO",
    "https://github.com/DIAL-RPI/KAMP-Net",
    "https://github.com/williamcaicedo/ISeeU",
    "https://github.com/uf-hobi-informatics-lab/ClinicalTransformerRelationExtraction",
    "https://github.com/HECTA-UoM/ClinicalNMT",
    "https://github.com/haoxuanli-pku/ADRnet",
    "https://github.com/ouyangjiahong/longitudinal-pooling",
    "https://github.com/brudfors/spm_superres",
    "https://github.com/YuDong5018/clinic-lens",
    "https://github.com/tanlab/MIMIC-III-Clinical-Drug-Representations",
    "https://github.com/nlpie-research/Lightweight-Clinical-Transformers",
    "https://github.com/Balasingham-AI-Group/Survival_CPlusClinical",
    "https://github.com/frankkramer-lab/covid19.MISenn",
    "https://github.com/SZUHVern/MGA",
    "https://github.com/ericzhang1/BAGAU-Net",
    "https://github.com/dengzhuo-AI/Real-Fundus",
    "https://github.com/microsoft/attribute-structuring",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceRow {
    pub name: &'static str,
    pub stars: u64,
    pub forks: u64,
    pub open_issues: u64,
    pub contributors: u64,
    pub tier: MaturityTier,
}

const fn row(
    name: &'static str,
    tier: MaturityTier,
    stars: u64,
    forks: u64,
    open_issues: u64,
    contributors: u64,
) -> ReferenceRow {
    ReferenceRow {
        name,
        stars,
        forks,
        open_issues,
        contributors,
        tier,
    }
}

use MaturityTier::{High, Low, Medium};

pub const REFERENCE_ROWS: [ReferenceRow; 23] = [
    row("CPath_Survey", Low, 0, 0, 0, 1),
    row("smm4h_2021_classification", Low, 4, 2, 1, 2),
    row("Clinical-Longformer", Medium, 52, 9, 2, 2),
    row("PyTrial", Medium, 62, 9, 3, 2),
    row("Trial2Vec", Low, 16, 3, 3, 1),
    row("oncoEnrichR", Medium, 48, 10, 2, 2),
    row("ezcox", Low, 20, 2, 0, 2),
    row("CIR", Low, 21, 6, 0, 3),
    row("BioSentVec", High, 546, 93, 13, 4),
    row("long-biomedical-model", Low, 3, 1, 0, 3),
    row("ConvolutionMedicalNer", Low, 11, 9, 1, 1),
    row("multimodal_fairness", Low, 10, 2, 14, 11),
    row("mmc-amd", Low, 14, 7, 1, 2),
    row("ClinGen", Low, 26, 1, 0, 1),
    row("CDO", Medium, 52, 7, 8, 1),
    row("KAMP-Net", Low, 12, 6, 0, 2),
    row("ISeeU", Low, 25, 8, 0, 1),
    row("ClinicalTransformerRelationExtraction", High, 116, 23, 11, 1),
    row("ClinicalNMT", Low, 0, 0, 0, 1),
    row("ADRnet", Low, 1, 0, 0, 1),
    row("longitudinal-pooling", Low, 5, 1, 0, 1),
    row("spm_superres", Low, 14, 4, 0, 2),
    row("clinic-lens", Low, 0, 0, 0, 1),
];

/// The printed lines, verbatim.
pub const REFERENCE_LINES: [&str; 23] = [
    "The project 'CPath_Survey' has a maturity level of Low. It has 0 stars, 0 forks, 0 open issues, and 1 contributors.",
    "The project 'smm4h_2021_classification' has a maturity level of Low. It has 4 stars, 2 forks, 1 open issues, and 2 contributors.",
    "The project 'Clinical-Longformer' has a maturity level of Medium. It has 52 stars, 9 forks, 2 open issues, and 2 contributors.",
    "The project 'PyTrial' has a maturity level of Medium. It has 62 stars, 9 forks, 3 open issues, and 2 contributors.",
    "The project 'Trial2Vec' has a maturity level of Low. It has 16 stars, 3 forks, 3 open issues, and 1 contributors.",
    "The project 'oncoEnrichR' has a maturity level of Medium. It has 48 stars, 10 forks, 2 open issues, and 2 contributors.",
    "The project 'ezcox' has a maturity level of Low. It has 20 stars, 2 forks, 0 open issues, and 2 contributors.",
    "The project 'CIR' has a maturity level of Low. It has 21 stars, 6 forks, 0 open issues, and 3 contributors.",
    "The project 'BioSentVec' has a maturity level of High. It has 546 stars, 93 forks, 13 open issues, and 4 contributors.",
    "The project 'long-biomedical-model' has a maturity level of Low. It has 3 stars, 1 forks, 0 open issues, and 3 contributors.",
    "The project 'ConvolutionMedicalNer' has a maturity level of Low. It has 11 stars, 9 forks, 1 open issues, and 1 contributors.",
    "The project 'multimodal_fairness' has a maturity level of Low. It has 10 stars, 2 forks, 14 open issues, and 11 contributors.",
    "The project 'mmc-amd' has a maturity level of Low. It has 14 stars, 7 forks, 1 open issues, and 2 contributors.",
    "The project 'ClinGen' has a maturity level of Low. It has 26 stars, 1 forks, 0 open issues, and 1 contributors.",
    "The project 'CDO' has a maturity level of Medium. It has 52 stars, 7 forks, 8 open issues, and 1 contributors.",
    "The project 'KAMP-Net' has a maturity level of Low. It has 12 stars, 6 forks, 0 open issues, and 2 contributors.",
    "The project 'ISeeU' has a maturity level of Low. It has 25 stars, 8 forks, 0 open issues, and 1 contributors.",
    "The project 'ClinicalTransformerRelationExtraction' has a maturity level of High. It has 116 stars, 23 forks, 11 open issues, and 1 contributors.",
    "The project 'ClinicalNMT' has a maturity level of Low. It has 0 stars, 0 forks, 0 open issues, and 1 contributors.",
    "The project 'ADRnet' has a maturity level of Low. It has 1 stars, 0 forks, 0 open issues, and 1 contributors.",
    "The project 'longitudinal-pooling' has a maturity level of Low. It has 5 stars, 1 forks, 0 open issues, and 1 contributors.",
    "The project 'spm_superres' has a maturity level of Low. It has 14 stars, 4 forks, 0 open issues, and 2 contributors.",
    "The project 'clinic-lens' has a maturity level of Low. It has 0 stars, 0 forks, 0 open issues, and 1 contributors.",
];
