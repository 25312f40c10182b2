function printForm() {
    this.print({ bUI: true, bSilent: false });
}
printForm();
