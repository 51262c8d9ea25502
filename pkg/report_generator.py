#!/usr/bin/env python3
"""
Report Generator
Formats test reports and simulation summaries as printable text and as
single-page PDF documents
"""

import logging
from datetime import datetime

from hypothesis_tests import TestReport
from montecarlo import EmpiricalSummary

logger = logging.getLogger(__name__)


class ReportGenerator:
    """Class for rendering TestReport and EmpiricalSummary objects"""

    def __init__(self, title: str = "COHERENCE ANALYSIS", author: str = None):
        self.title = title
        self.author = author

    def test_rows(self, report: TestReport):
        rows = [
            ['Statistic', report.statistic_kind.value],
            ['Value', f"{report.statistic:.6f}"],
            ['Achieving pair', f"({report.pair[0]}, {report.pair[1]})"],
            ['n x p', f"{report.n} x {report.p}"],
            ['Band gap m', str(report.m)],
            ['Regime', f"{report.regime.alpha_regime.value} (kappa = {report.regime.kappa:g})"],
            ['Normalized W', f"{report.normalized:.4f}"],
            ['Calibration', report.method.value],
            ['Level', f"{report.level:g}"],
            ['Critical value', f"{report.critical_value:.6f}"],
            ['p-value', f"{report.p_value:.4g}"],
            ['Decision', report.decision.value.upper()],
        ]
        return rows

    def summary_rows(self, summary: EmpiricalSummary):
        plan = summary.plan
        rows = [
            ['Distribution', plan.spec.label],
            ['n x p', f"{plan.n} x {plan.p}"],
            ['Design', f"MA({plan.m})" if plan.m else 'i.i.d.'],
            ['Statistic', f"{plan.kind.value} (gap {plan.gap})"],
            ['Reported', plan.reported.value],
            ['Regime', f"{plan.regime.alpha_regime.value} (kappa = {plan.regime.kappa:g})"],
            ['Replications', str(plan.replications)],
            ['Master seed', str(plan.master_seed)],
            ['Mean', f"{summary.mean:.6f}"],
            ['Median', f"{summary.median:.6f}"],
            ['KS vs F_Y', f"{summary.ks_vs_gumbel:.4f}"],
            ['KS vs intermediate', f"{summary.ks_vs_intermediate:.4f}"],
        ]
        for eps, fraction in summary.lln_fraction.items():
            rows.append([f"LLN fraction (eps = {eps:g})", f"{fraction:.3f}"])
        return rows

    def format_text(self, heading: str, rows) -> str:
        width = 60
        text = f"{'=' * width}\n{self.title:^{width}}\n{heading:^{width}}\n{'=' * width}\n"
        for label, value in rows:
            text += f"{label:<28} {value}\n"
        text += f"{'-' * width}\nGenerated: {datetime.now().strftime('%d/%m/%Y at %H:%M')}\n"
        return text

    def format_test_report(self, report: TestReport) -> str:
        text = self.format_text('HYPOTHESIS TEST REPORT', self.test_rows(report))
        for warning in report.warnings:
            text += f"WARNING: {warning}\n"
        return text

    def format_summary(self, summary: EmpiricalSummary) -> str:
        return self.format_text('MONTE CARLO SUMMARY', self.summary_rows(summary))

    def export_pdf(self, heading: str, rows, filename: str, notes=()):
        """Write a single-page A4 PDF with a bordered two-column table"""
        from reportlab.lib import colors
        from reportlab.lib.enums import TA_CENTER
        from reportlab.lib.pagesizes import A4
        from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
        from reportlab.lib.units import inch
        from reportlab.platypus import Frame, PageTemplate, Paragraph, Spacer, Table, TableStyle
        from reportlab.platypus.doctemplate import BaseDocTemplate

        def draw_border(canvas, doc):
            canvas.saveState()
            canvas.setStrokeColor(colors.darkblue)
            canvas.setLineWidth(2)
            canvas.rect(30, 30, A4[0] - 60, A4[1] - 60)
            canvas.restoreState()

        doc = BaseDocTemplate(filename, pagesize=A4, author=self.author or '', title=heading)
        frame = Frame(0.8 * inch, 0.8 * inch, A4[0] - 1.6 * inch, A4[1] - 1.6 * inch)
        doc.addPageTemplates([PageTemplate(id='bordered', frames=frame, onPage=draw_border)])

        styles = getSampleStyleSheet()
        title_style = ParagraphStyle('Title', parent=styles['Heading1'], fontSize=16,
                                     alignment=TA_CENTER, fontName='Helvetica-Bold')
        heading_style = ParagraphStyle('Heading', parent=styles['Heading2'], fontSize=12,
                                       alignment=TA_CENTER, fontName='Helvetica-Bold')
        normal_style = ParagraphStyle('Body', parent=styles['Normal'], fontSize=9)

        story = [
            Paragraph(f"<b>{self.title}</b>", title_style),
            Spacer(1, 6),
            Paragraph(f"<b>{heading}</b>", heading_style),
            Spacer(1, 12),
        ]
        table = Table([['Item', 'Value']] + [list(row) for row in rows], colWidths=[2.6 * inch, 3.4 * inch])
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, 0), colors.lightgrey),
            ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
            ('FONTSIZE', (0, 0), (-1, -1), 9),
            ('GRID', (0, 0), (-1, -1), 0.5, colors.black),
            ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
        ]))
        story.append(table)
        story.append(Spacer(1, 12))
        for note in notes:
            story.append(Paragraph(note, normal_style))
        story.append(Paragraph(f"Generated {datetime.now().strftime('%d/%m/%Y at %H:%M')}", normal_style))

        doc.build(story)
        logger.info(f"PDF report written to {filename}")
        return filename

    def export_test_report(self, report: TestReport, filename: str):
        notes = [f"Warning: {w}" for w in report.warnings]
        return self.export_pdf('HYPOTHESIS TEST REPORT', self.test_rows(report), filename, notes)

    def export_summary(self, summary: EmpiricalSummary, filename: str):
        return self.export_pdf('MONTE CARLO SUMMARY', self.summary_rows(summary), filename)
